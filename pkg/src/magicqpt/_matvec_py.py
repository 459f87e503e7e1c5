"""Pure numpy implementation of the matvec kernel (fallback for the compiled one)."""

import numpy as np

_SIGN_CACHE: dict = {}


def _parity_signs(dim: int, zmask: int) -> np.ndarray:
    key = (dim, zmask)
    signs = _SIGN_CACHE.get(key)
    if signs is None:
        idx = np.arange(dim, dtype=np.int64) & zmask
        par = np.zeros(dim, dtype=np.int64)
        while np.any(idx):
            par ^= idx & 1
            idx >>= 1
        signs = (1 - 2 * par).astype(np.float64)
        if len(_SIGN_CACHE) > 64:
            _SIGN_CACHE.clear()
        _SIGN_CACHE[key] = signs
    return signs


def matvec_real(diag, xmasks, zmasks, coeffs, v, out):
    """Same contract as the compiled ``matvec_real``; flips are reshaped views."""
    dim = v.shape[0]
    n = dim.bit_length() - 1
    np.multiply(diag, v, out=out)
    shape = (2,) * n
    out_t = out.reshape(shape)
    for x, z, c in zip(xmasks, zmasks, coeffs):
        src = v if z == 0 else v * _parity_signs(dim, int(z))
        # bit i of the index is axis n-1-i of the C-ordered tensor
        axes = tuple(n - 1 - i for i in range(n) if (int(x) >> i) & 1)
        flipped = np.flip(src.reshape(shape), axis=axes) if axes else src.reshape(shape)
        out_t += c * flipped
    return out
