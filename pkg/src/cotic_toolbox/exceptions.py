from typing import Any, Optional


class FileNotFound(Exception):
    """
    Exception rised when an invalid file path is detected

    Parameters
    ----------
    path : str
        the invalid path
    """

    def __init__(self, path: str, *args: object) -> None:
        super().__init__(*args)
        self.__path = path

    def __str__(self) -> str:
        return """'{}' is an invalid file path.""".format(self.__path)


class UnknownFileExtension(Exception):
    """
    Exception rised when an unknown file extension is detected

    Parameters
    ----------
    extension : str
        the invalid extension
    """

    def __init__(self, extension: str, *args: object) -> None:
        super().__init__(*args)
        self.__extension = extension

    def __str__(self) -> str:
        return """The extension '{}' is not supported.""".format(self.__extension)


class DimensionError(Exception):
    """
    Exception raised when the extents of two operands are not compatible

    Parameters
    ----------
    msg : str
        the message describing the mismatch
    """

    def __init__(self, msg: str, *args: object) -> None:
        super().__init__(*args)
        self.__msg = msg

    def __str__(self) -> str:
        return """Dimension mismatch: {}""".format(self.__msg)


class DomainError(Exception):
    """
    Exception raised when an operation receives a value outside of its mathematical domain

    Parameters
    ----------
    msg : str
        the message describing the invalid value
    """

    def __init__(self, msg: str, *args: object) -> None:
        super().__init__(*args)
        self.__msg = msg

    def __str__(self) -> str:
        return """Domain error: {}""".format(self.__msg)


class ContractError(Exception):
    """
    Exception raised when a function is called in violation of its usage contract

    Parameters
    ----------
    msg : str
        the message describing the violated contract
    """

    def __init__(self, msg: str, *args: object) -> None:
        super().__init__(*args)
        self.__msg = msg

    def __str__(self) -> str:
        return """{}""".format(self.__msg)


class DataFormatError(Exception):
    """
    Exception raised when an event file contains an invalid entry

    Parameters
    ----------
    msg : str
        the message describing the invalid entry
    line : Optional[int]
        the line of the file (header is line 1) holding the invalid entry, if known
    """

    def __init__(self, msg: str, line: Optional[int] = None, *args: object) -> None:
        super().__init__(*args)
        self.__msg = msg
        self.__line = line

    @property
    def line(self) -> Optional[int]:
        """
        The file line holding the invalid entry
        """
        return self.__line

    def __str__(self) -> str:
        if self.__line is None:
            return """Invalid event data: {}""".format(self.__msg)
        return """Invalid event data at line {}: {}""".format(self.__line, self.__msg)


class EmptyDatasetError(Exception):
    """
    Exception raised when an event file does not contain any event

    Parameters
    ----------
    path : str
        the path of the empty file
    """

    def __init__(self, path: str, *args: object) -> None:
        super().__init__(*args)
        self.__path = path

    def __str__(self) -> str:
        return """The file '{}' does not contain any event.""".format(self.__path)


class InsufficientDataError(Exception):
    """
    Exception raised when a dataset is too small for the requested operation

    Parameters
    ----------
    msg : str
        a message explaining the error
    """

    def __init__(self, msg: str, *args: object) -> None:
        super().__init__(*args)
        self.__msg = msg

    def __str__(self) -> str:
        return """{}""".format(self.__msg)


class SchemaMismatch(Exception):
    """
    Exception raised when a model and a dataset (or two files) disagree on the number of
    event types or on the stored structure

    Parameters
    ----------
    msg : str
        a message explaining the mismatch
    """

    def __init__(self, msg: str, *args: object) -> None:
        super().__init__(*args)
        self.__msg = msg

    def __str__(self) -> str:
        return """Schema mismatch: {}""".format(self.__msg)


class IntegrityError(Exception):
    """
    Exception raised when a checkpoint file is corrupted or its checksum does not match

    Parameters
    ----------
    path : str
        the path of the corrupted file
    reason : str
        a short description of the failed check
    """

    def __init__(self, path: str, reason: str = "checksum mismatch", *args: object) -> None:
        super().__init__(*args)
        self.__path = path
        self.__reason = reason

    def __str__(self) -> str:
        return """The checkpoint '{}' failed the integrity check ({}).""".format(
            self.__path, self.__reason
        )


class UnstableParameters(Exception):
    """
    Exception raised when a Hawkes parametrization has a branching ratio not smaller than one

    Parameters
    ----------
    branching_ratio : float
        the branching ratio of the rejected parametrization
    """

    def __init__(self, branching_ratio: float, *args: object) -> None:
        super().__init__(*args)
        self.__ratio = branching_ratio

    @property
    def branching_ratio(self) -> float:
        return self.__ratio

    def __str__(self) -> str:
        return """The branching ratio {:.6g} is not smaller than 1: the process is unstable.""".format(
            self.__ratio
        )


class NoPredictionsError(Exception):
    """
    Exception raised when no sequence of a dataset has a next event to predict. The partial
    report (holding the log-likelihood) is attached to the exception.

    Parameters
    ----------
    report : Any
        the partially filled metrics report
    """

    def __init__(self, report: Any, *args: object) -> None:
        super().__init__(*args)
        self.__report = report

    @property
    def report(self) -> Any:
        return self.__report

    def __str__(self) -> str:
        return """No sequence has at least two events: return-time MAE and type accuracy are undefined."""


class TrainingDiverged(Exception):
    """
    Exception raised when the training loss becomes non-finite. The model is left holding the
    parameters of the last good epoch.

    Parameters
    ----------
    epoch : int
        the epoch in which the divergence was detected
    history : Any
        the training history recorded up to the divergence
    """

    def __init__(self, epoch: int, history: Any = None, *args: object) -> None:
        super().__init__(*args)
        self.__epoch = epoch
        self.__history = history

    @property
    def epoch(self) -> int:
        return self.__epoch

    @property
    def history(self) -> Any:
        return self.__history

    def __str__(self) -> str:
        return """Non-finite loss encountered during epoch {}.""".format(self.__epoch)


class ConfigurationError(Exception):
    """
    Exception raised when a configuration file or option is invalid

    Parameters
    ----------
    msg : str
        a message explaining the error
    """

    def __init__(self, msg: str, *args: object) -> None:
        super().__init__(*args)
        self.__msg = msg

    def __str__(self) -> str:
        return """Invalid configuration: {}""".format(self.__msg)
