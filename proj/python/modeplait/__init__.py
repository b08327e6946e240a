"""Streaming regime discovery, time-varying causal graphs, and forecasting."""

try:
    from ._modeplait import *  # noqa: F401,F403  (installed wheel layout)
    from ._modeplait import __doc__ as _core_doc  # noqa: F401
except ImportError:  # pragma: no cover - in-tree build puts the module on sys.path
    from _modeplait import *  # noqa: F401,F403
