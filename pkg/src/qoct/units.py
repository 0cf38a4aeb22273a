from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Units:
    """Physical constants used by every energy- or length-bearing routine.

    ``name`` is either ``"si"`` or ``"natural"``. Dimensional results such as
    the standard quantum limit only make sense in SI, and check ``is_si``.
    """

    name: str
    hbar: float
    c: float

    @property
    def is_si(self) -> bool:
        return self.name == "si"


SI = Units("si", hbar=1.054571817e-34, c=299792458.0)
NATURAL = Units("natural", hbar=1.0, c=1.0)


def units_by_name(name: str) -> Units:
    try:
        return {"si": SI, "natural": NATURAL}[name]
    except KeyError:
        raise ValueError(f"unknown unit system {name!r} (expected 'si' or 'natural')") from None
