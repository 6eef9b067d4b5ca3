"""Labels with a bounded-operation NCA decoder."""
from .core import *  # noqa: F401,F403
from .core import __all__ as _core_all
from .core import check_table, measure_a
from .intset import *  # noqa: F401,F403
from .intset import __all__ as _intset_all

__all__ = [*_core_all, *_intset_all, "check_table", "measure_a"]
