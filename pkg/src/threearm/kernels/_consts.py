"""Quadrature tables shared by both kernel backends."""

import numpy as np


def _positive_gl(n):
    x, w = np.polynomial.legendre.leggauss(n)
    keep = x > 0
    order = np.argsort(-x[keep])
    return x[keep][order], w[keep][order]


# Gauss-Legendre rules of order 6, 12, 20 (positive half, padded to 10)
GL_NODES = np.zeros((3, 10))
GL_WEIGHTS = np.zeros((3, 10))
for _row, _n in enumerate((6, 12, 20)):
    _x, _w = _positive_gl(_n)
    GL_NODES[_row, : _x.size] = _x
    GL_WEIGHTS[_row, : _w.size] = _w

# 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15 tables);
# the last entry of GK_* is the centre node.
GK_NODES = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
])
GK_WEIGHTS = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
G7_WEIGHTS = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

# |limits| beyond this carry no mass in double precision
LIMIT_CLAMP = 37.0
# truncation of the conditioning coordinate; 2*Phi(-9) ~ 2e-19
TAIL = 9.0
MAX_INTERVALS = 4000
