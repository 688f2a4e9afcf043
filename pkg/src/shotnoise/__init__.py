"""Renewal shot noise with response functions regularly varying of index -1/2."""

from shotnoise.jumps import DelayLaw, JumpLaw, jump_law_from_spec
from shotnoise.kernels import ResponseKernel, kernel_from_spec
from shotnoise.rng import RngStream

__version__ = "0.1.0"

__all__ = ["DelayLaw", "JumpLaw", "ResponseKernel", "RngStream", "jump_law_from_spec", "kernel_from_spec"]
