"""OFDM PAPR reduction laboratory.

Thin Python facade over the C++ core: signal synthesis, the randomized
pilot-sign search, dataset generation, the from-scratch MLP, and the CCDF /
complexity evaluation tools.
"""

from paprlab._core import *  # noqa: F401,F403
from paprlab._core import __doc__ as _core_doc  # noqa: F401

__version__ = "0.1.0"
