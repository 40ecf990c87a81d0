"""Trajectory analysis, job specs and NAMD input generation for protein MD runs."""

try:
    from ._namdkit import *  # noqa: F403
    from ._namdkit import __doc__ as _native_doc  # noqa: F401
except ImportError:  # in-tree build: the extension sits next to the build tree, not the package
    from _namdkit import *  # noqa: F403

__version__ = "0.1.0"
