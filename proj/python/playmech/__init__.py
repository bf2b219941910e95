"""Python bindings for the playmech pipeline."""

try:
    from ._playmech import *  # noqa: F401,F403
    from ._playmech import __version__
except ImportError:
    from _playmech import *  # noqa: F401,F403
    from _playmech import __version__
