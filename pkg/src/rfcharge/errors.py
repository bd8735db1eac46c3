class SimulationError(Exception):
    """Base class for every error raised by rfcharge."""


class GeometryError(SimulationError):
    pass


class DuplicateSites(GeometryError):
    pass


class SiteOutsideRegion(GeometryError):
    pass


class TooFewSites(GeometryError):
    pass


class InvalidVertex(GeometryError):
    pass


class NonPositivePower(SimulationError, ValueError):
    pass


class ZeroDistance(SimulationError, ValueError):
    pass


class NoActors(SimulationError):
    pass


class NoInnerVertices(SimulationError):
    pass


class NoSensors(SimulationError):
    pass


class ConfigError(SimulationError):
    pass


class ParseError(ConfigError):
    def __init__(self, lineno, message):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class ValidationError(ConfigError):
    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key


class MissingSweep(SimulationError):
    pass
