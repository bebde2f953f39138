import logging
import time
from contextlib import contextmanager

logger = logging.getLogger("bezierflow")


class Agent:
    """
    Base class of the workflow agents: colored, name-prefixed log lines and timed stages
    """

    GREEN = '\033[32m'
    CYAN = '\033[36m'
    BG_BLACK = '\033[40m'
    RESET = '\033[0m'

    name: str = ""
    color: str = '\033[37m'

    def log(self, message: str, level: int = logging.INFO):
        logger.log(level, f"{self.BG_BLACK}{self.color}[{self.name}] {message}{self.RESET}")

    def warn(self, message: str):
        self.log(message, logging.WARNING)

    @contextmanager
    def stage(self, what: str):
        """
        Log the start of one stage of a run and, once it returns, its wall-clock duration
        """
        self.log(f"{self.name} is {what}")
        started = time.perf_counter()
        yield
        self.log(f"{self.name} finished {what} in {time.perf_counter() - started:.2f}s", logging.DEBUG)
