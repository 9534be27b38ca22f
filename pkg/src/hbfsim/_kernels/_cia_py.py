"""Pure-numpy fallback for the column-iterative ascent sweep.

One call performs a single in-place sweep over all columns of ``b`` in the
fixed order (column 0..m-1, row 0..n-1).  Entries inside a column see the
updates of earlier entries immediately (Gauss-Seidel style), which is what
makes the objective ``|det(b^H d b)|`` non-decreasing sweep over sweep.
"""

from __future__ import annotations

import numpy as np


def cia_sweep(d: np.ndarray, b: np.ndarray, scale: float,
              reg_eps: float) -> tuple[float, int]:
    """Run one ascent sweep in place.

    Parameters
    ----------
    d : (n, n) complex Hermitian PSD matrix.
    b : (n, m) complex, entries of magnitude ``scale``; updated in place.
    scale : entry magnitude, typically ``1/sqrt(n)``.
    reg_eps : relative ridge added to the reduced system when it is
        numerically singular.

    Returns
    -------
    (max_delta, n_reg) : largest entrywise update magnitude during the
        sweep and the number of regularization events.
    """
    n, m = b.shape
    max_delta = 0.0
    n_reg = 0
    for j in range(m):
        if m == 1:
            g = d
        else:
            keep = np.arange(m) != j
            bbar = b[:, keep]
            db = d @ bbar                       # (n, m-1)
            c = bbar.conj().T @ db              # reduced Gram, (m-1, m-1)
            try:
                x = np.linalg.solve(c, db.conj().T)
                if not np.all(np.isfinite(x)):
                    raise np.linalg.LinAlgError("non-finite solve")
            except np.linalg.LinAlgError:
                n_reg += 1
                ridge = reg_eps * (np.trace(c).real / (m - 1))
                c = c + ridge * np.eye(m - 1)
                try:
                    x = np.linalg.solve(c, db.conj().T)
                except np.linalg.LinAlgError:
                    raise RuntimeError(
                        "reduced system singular after regularization")
                if not np.all(np.isfinite(x)):
                    raise RuntimeError(
                        "reduced system singular after regularization")
            g = d - db @ x                      # Schur complement of c in d
        col = b[:, j]
        t = g @ col
        for i in range(n):
            s = t[i] - g[i, i] * col[i]
            mag = abs(s)
            new = scale * s / mag if mag > 0.0 else complex(scale)
            delta = new - col[i]
            ad = abs(delta)
            if ad > 0.0:
                if ad > max_delta:
                    max_delta = ad
                col[i] = new
                t += g[:, i] * delta
    return max_delta, n_reg
