"""Exception hierarchy. CLI exit codes hang off ``exit_code``."""


class Stereo360Error(Exception):
    exit_code = 3


class InvalidParameterError(Stereo360Error, ValueError):
    exit_code = 2


class InvalidInputError(Stereo360Error, ValueError):
    pass


class ManifestError(InvalidInputError):
    pass


class DegenerateEnergyError(Stereo360Error, ArithmeticError):
    exit_code = 5


class DegenerateReferenceError(DegenerateEnergyError):
    pass


class IncompleteFeaturesError(InvalidInputError):
    pass


class ProvenanceError(Stereo360Error):
    exit_code = 4


class ProtocolError(Stereo360Error):
    pass


class UndefinedCorrelationError(Stereo360Error, ArithmeticError):
    exit_code = 5
