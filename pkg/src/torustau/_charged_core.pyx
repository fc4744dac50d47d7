# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loop: products over Young-diagram boxes.

This is the hot kernel of the charged-partition series; a pure-Python
twin lives in ``_charged_py`` and is selected at import when the
extension is unavailable.
"""


def zbif_boxes(double complex x, long[::1] yp_rows, long[::1] yp_tr,
               long[::1] y_rows, long[::1] y_tr):
    """prod_{box in Y} (x+1+arm_{Y'}+leg_Y) * prod_{box in Y'} (x-1-arm_Y-leg_{Y'})

    Partitions are passed as row arrays plus transpose row arrays.
    """
    cdef double complex out = 1.0 + 0.0j
    cdef Py_ssize_t i, j
    cdef long arm, leg
    cdef Py_ssize_t ny = y_rows.shape[0]
    cdef Py_ssize_t nyp = yp_rows.shape[0]
    for i in range(ny):
        for j in range(y_rows[i]):
            arm = (yp_rows[i] if i < nyp else 0) - (j + 1)
            leg = y_tr[j] - (i + 1)
            out = out * (x + 1.0 + arm + leg)
    for i in range(nyp):
        for j in range(yp_rows[i]):
            arm = (y_rows[i] if i < ny else 0) - (j + 1)
            leg = yp_tr[j] - (i + 1)
            out = out * (x - 1.0 - arm - leg)
    return out
