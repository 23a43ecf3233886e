import numpy as np
import numpy.typing as npt

def sturm_count(
    diag: npt.NDArray[np.float64],
    offdiag: npt.NDArray[np.float64],
    x: float,
    pivmin: float,
) -> int: ...
def bisect_eigenvalue(
    diag: npt.NDArray[np.float64],
    offdiag: npt.NDArray[np.float64],
    k: int,
    lo: float,
    hi: float,
    tol: float,
    max_iter: int,
    pivmin: float,
) -> tuple[float, int]: ...
