"""Measured log-log slopes across a rescaled family against the exact prediction."""

from fractions import Fraction

from nsverify import gallery, measure_exponent
from nsverify.scaling import STANDARD_LAW

field = gallery("tg-embedded-2d")
for kind in ("sup_vorticity", "sup_velocity", "energy"):
    m = measure_exponent(field, STANDARD_LAW, kind, [Fraction(1, 2), 1, 2, 4, 8])
    print(f"{kind:<14} slope {m.slope:.12f}  predicted {m.predicted}  deviation {m.deviation:.1e}")
