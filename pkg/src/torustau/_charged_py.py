"""Pure-Python twin of the compiled box-product kernel."""


def zbif_boxes(x, yp_rows, yp_tr, y_rows, y_tr):
    out = 1.0 + 0.0j
    ny = len(y_rows)
    nyp = len(yp_rows)
    for i in range(ny):
        yp_i = yp_rows[i] if i < nyp else 0
        for j in range(y_rows[i]):
            out *= x + (yp_i - j + y_tr[j] - i - 1)
    for i in range(nyp):
        y_i = y_rows[i] if i < ny else 0
        for j in range(yp_rows[i]):
            out *= x - (y_i - j + yp_tr[j] - i - 1)
    return out
