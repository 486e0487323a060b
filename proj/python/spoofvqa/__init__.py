"""Synthetic spoof-VQA toolkit: connector, losses, caption filtering, metrics."""

try:
    from ._core import *  # noqa: F401,F403
    from ._core import __doc__ as _core_doc
except ImportError:  # in-tree builds keep _core next to the package on sys.path
    from _core import *  # noqa: F401,F403
    from _core import __doc__ as _core_doc

__doc__ = _core_doc
__version__ = "0.1.0"
