"""Reference solutions for the measured prototype configuration, rounded to 4 decimals."""

# forward solutions of the measured joints, rows in (m, n) order ++, +-, -+, --
FK_TABLE = (
    (-80.3862, 66.7300, 307.2328),
    (194.7183, 66.7300, 78.1662),
    (194.7183, 66.7300, 61.8338),
    (-80.3862, 66.7300, -167.2328),
)

# inverse solutions of the first forward row, v = +1, (w1, w2, w3) lexicographic
IK_TABLE = (
    (124.6992, 244.6992, 246.9229),
    (124.6992, 244.6992, -113.4629),
    (124.6992, 8.7608, 246.9229),
    (124.6992, 8.7608, -113.4629),
    (-111.2392, 244.6992, 246.9229),
    (-111.2392, 244.6992, -113.4629),
    (-111.2392, 8.7608, 246.9229),
    (-111.2392, 8.7608, -113.4629),
)

GOLDEN_TOL = 5e-2
