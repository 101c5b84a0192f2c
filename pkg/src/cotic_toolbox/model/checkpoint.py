import hashlib
import json
from os.path import isfile
from typing import Any, Dict, Mapping, Optional, Tuple

import h5py
import numpy as np

from cotic_toolbox.exceptions import FileNotFound, IntegrityError, SchemaMismatch
from cotic_toolbox.model.cotic import CoticModel, ModelConfig

FORMAT_VERSION = 1


def _checksum(config: str, metadata: str, arrays: Mapping[str, np.ndarray]) -> str:
    """
    SHA-256 digest of the serialized configuration, metadata and of every parameter (name,
    shape and raw float64 bytes, in sorted name order)
    """
    digest = hashlib.sha256()
    digest.update(config.encode("utf-8"))
    digest.update(metadata.encode("utf-8"))
    for name in sorted(arrays):
        array = np.ascontiguousarray(arrays[name], dtype="<f8")
        digest.update(name.encode("utf-8"))
        digest.update(repr(array.shape).encode("utf-8"))
        digest.update(array.tobytes())
    return digest.hexdigest()


def save_checkpoint(
    model: CoticModel, path: str, metadata: Optional[Dict[str, Any]] = None
) -> None:
    """
    Saves the configuration and all the parameters of a model to an HDF5 file. The file holds
    one float64 dataset per parameter (named by its dotted path), the JSON-encoded model
    configuration and metadata as attributes, and a SHA-256 checksum of the whole content.
    Saving the same model twice produces byte-identical files.

    Parameters
    ----------
    model: CoticModel
        the model to save
    path: str
        the destination file
    metadata: Optional[Dict[str, Any]]
        JSON-serializable information stored alongside the model (e.g. the time scale of the
        training data)
    """
    config = json.dumps(model.config.to_dict(), sort_keys=True)
    extra = json.dumps(metadata or {}, sort_keys=True)
    arrays = {name: p.value for name, p in model.named_parameters().items()}

    with h5py.File(path, "w") as file:
        for name in sorted(arrays):
            file.create_dataset(name, data=arrays[name], dtype="<f8", track_times=False)
        file.attrs["format_version"] = FORMAT_VERSION
        file.attrs["config"] = config
        file.attrs["metadata"] = extra
        file.attrs["checksum"] = _checksum(config, extra, arrays)


def _collect(group: h5py.Group, prefix: str, arrays: Dict[str, np.ndarray]) -> None:
    for key, item in group.items():
        name = f"{prefix}{key}"
        if isinstance(item, h5py.Dataset):
            arrays[name] = np.array(item[()], dtype=np.float64)
        else:
            _collect(item, f"{name}/", arrays)


def load_checkpoint(
    path: str, expected_num_types: Optional[int] = None
) -> Tuple[CoticModel, Dict[str, Any]]:
    """
    Loads a model saved with `save_checkpoint`.

    Parameters
    ----------
    path: str
        the checkpoint file
    expected_num_types: Optional[int]
        if given, the number of event types the model must have been built for

    Raises
    ------
    FileNotFound
        exception raised if the file does not exist
    IntegrityError
        exception raised if the file cannot be read, is incomplete or fails the checksum
    SchemaMismatch
        exception raised if the model number of types differs from `expected_num_types`

    Returns
    -------
    Tuple[CoticModel, Dict[str, Any]]
        the restored model and the metadata stored with it
    """
    if not isfile(path):
        raise FileNotFound(path)

    try:
        with h5py.File(path, "r") as file:
            config = str(file.attrs["config"])
            extra = str(file.attrs["metadata"])
            checksum = str(file.attrs["checksum"])
            arrays: Dict[str, np.ndarray] = {}
            _collect(file, "", arrays)
    except (OSError, KeyError) as error:
        raise IntegrityError(path, reason=f"unreadable checkpoint ({error})")

    if _checksum(config, extra, arrays) != checksum:
        raise IntegrityError(path)

    model = CoticModel(ModelConfig.from_dict(json.loads(config)))

    if expected_num_types is not None and model.num_types != expected_num_types:
        raise SchemaMismatch(
            f"the checkpoint models {model.num_types} event type(s), the data holds {expected_num_types}"
        )

    parameters = model.named_parameters()
    if set(parameters) != set(arrays):
        raise IntegrityError(path, reason="parameter set does not match the stored configuration")

    for name, parameter in parameters.items():
        if arrays[name].shape != parameter.shape:
            raise IntegrityError(path, reason=f"parameter '{name}' has shape {arrays[name].shape}")
        parameter.assign(arrays[name])

    return model, json.loads(extra)
