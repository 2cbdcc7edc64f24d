"""Decentralized gradient-tracking minimax optimization simulator."""

try:
    from ._kgtmm import *  # noqa: F401,F403
    from ._kgtmm import __doc__  # noqa: F401
except ImportError:  # running from a build tree with the module on sys.path
    from _kgtmm import *  # noqa: F401,F403
