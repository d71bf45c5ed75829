from typing import Optional


class LongSimError(Exception):
    """Base class for every error raised by the simulator."""


class CatalogParseError(LongSimError):

    def __init__(self, message: str, row: Optional[int] = None):
        self.row = row
        prefix = f"row {row}: " if row is not None else ""
        super().__init__(f"{prefix}{message}")


class ValidationError(LongSimError):

    def __init__(self, field: str, message: str, row: Optional[int] = None):
        self.field = field
        self.message = message
        self.row = row
        prefix = f"row {row}: " if row is not None else ""
        super().__init__(f"{prefix}{field} {message}")


class DomainError(LongSimError):
    """A physics or analysis precondition does not hold."""


class ScheduleError(LongSimError):

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(f"{prefix}{message}")


class ConfigurationError(LongSimError):
    pass


class CollisionError(LongSimError):
    """A follower reached or passed its leader's rear bumper.

    Control laws only see the gap, so they raise without ids; the simulator
    records the vehicle and step on its collision events.
    """

    def __init__(self, gap: float, vehicle_id: Optional[int] = None, step: Optional[int] = None):
        self.vehicle_id = vehicle_id
        self.step = step
        self.gap = gap
        who = f"vehicle {vehicle_id}" if vehicle_id is not None else "follower"
        when = f" at step {step}" if step is not None else ""
        super().__init__(f"{who} collided{when} (gap {gap:.3f} ft)")


class OracleError(LongSimError):
    pass
