class LabException(Exception):
    exit_code = 1

    def __init__(self, message, **details):
        super().__init__(message)
        self.message = message
        self.details = details

    def to_dict(self):
        return {
            "error": self.__class__.__name__,
            "message": self.message,
            **self.details
        }


class ConfigException(LabException):
    exit_code = 2


class DomainException(LabException, ValueError):
    exit_code = 2


class AccuracyException(LabException):
    exit_code = 3


class NumericException(LabException):
    exit_code = 3


class ConsistencyException(LabException):
    exit_code = 1
