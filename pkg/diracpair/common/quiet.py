"""Set / get the package-wide quiet status."""
import logging

from .logger import logger


class Quiet:
    """Singleton holding the global quiet flag."""

    _is_quiet = False

    @classmethod
    def set(cls, value: bool) -> None:
        """Set quiet value and adjust the logger level."""
        cls._is_quiet = value
        logger.setLevel(logging.CRITICAL if value else logging.INFO)

    @classmethod
    def get(cls) -> bool:
        """Get quiet value."""
        return cls._is_quiet


def mute(yes_or_no: bool) -> None:
    """Enable or disable quiet mode."""
    Quiet.set(yes_or_no)


def is_quiet() -> bool:
    """Get quiet state."""
    return Quiet.get()


mute(is_quiet())
