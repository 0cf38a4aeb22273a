"""Quantized-field simulation of low-coherence (OCT / Michelson) interferometry."""

from qoct.units import NATURAL, SI, Units

__version__ = "0.1.0"

__all__ = ["NATURAL", "SI", "Units", "__version__"]
