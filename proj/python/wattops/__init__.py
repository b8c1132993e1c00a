"""Power provisioning, deployment validation, and runtime capping toolkit."""

try:
    from wattops._core import *  # noqa: F401,F403
    from wattops._core import __version__  # noqa: F401
except ImportError:
    # Source-tree test runs point WATTOPS_CORE_DIR at the built extension.
    from _core import *  # noqa: F401,F403
    from _core import __version__  # noqa: F401
