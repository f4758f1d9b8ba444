"""Generators for the subspace and signal models, plus instance persistence.

The central object is :class:`PlantedInstance`: a subspace spanned by one
(approximately) sparse vector and k iid Gaussian vectors, observed only
through a mixed basis W.  The recovery path sees W and nothing else; the
ground truth fields exist for evaluation.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np

from .exceptions import NumericalFailureError
from .linalg import orthonormal_basis
from .rng import RngStream
from .validation import check_matrix, check_support, check_vector

#: Condition-number cap for the random change of basis; worse draws are
#: discarded and redrawn.
MIX_CONDITION_LIMIT = 1e3

_MIX_ATTEMPTS = 100


@dataclass(frozen=True)
class TestVectorSpec:
    """Recipe for an approximately s-sparse test vector ``1_S + delta * u``."""

    n: int
    s: int
    delta: float = 0.01
    support: tuple[int, ...] = field(default=None)  # default: first s coordinates

    def __post_init__(self):
        if not 1 <= self.s <= self.n:
            raise ValueError(f"need 1 <= s <= n, got s={self.s}, n={self.n}")
        if self.delta < 0:
            raise ValueError(f"delta must be nonnegative, got {self.delta}")
        support = self.support
        if support is None:
            support = tuple(range(self.s))
        support = tuple(int(j) for j in check_support(support, self.n, "support"))
        if len(support) != self.s:
            raise ValueError(f"support has {len(support)} indices, expected s={self.s}")
        object.__setattr__(self, "support", support)


@dataclass(frozen=True, eq=False)
class PlantedInstance:
    """Ground truth for one trial of the planted-random model.

    ``W`` is the observed basis of span([v | vtilde]); when generated with
    ``mixed=True`` its columns are a random invertible combination of the
    planted vector and the Gaussian columns, so nothing about the planting
    leaks through column order or scale.
    """

    n: int
    k: int
    v: np.ndarray
    vtilde: np.ndarray
    W: np.ndarray
    mix: np.ndarray
    i_star: int
    S: np.ndarray


def top_support(v, s: int) -> np.ndarray:
    """Indices of the s largest |v| entries, ties to the lowest index; sorted."""
    v = check_vector(v)
    if not 1 <= s <= v.shape[0]:
        raise ValueError(f"need 1 <= s <= len(v), got s={s}")
    order = np.argsort(-np.abs(v), kind="stable")
    return np.sort(order[:s])


def make_test_vector(spec: TestVectorSpec, stream: RngStream) -> np.ndarray:
    """Draw ``v = 1_S + delta * u`` with ``u`` iid normal scaled to unit l1 norm.

    For ``delta < 1/2`` the largest-magnitude coordinate of v is guaranteed
    to lie in S, since every off-support entry is below delta and every
    on-support entry is above 1 - delta.
    """
    v = np.zeros(spec.n)
    v[list(spec.support)] = 1.0
    if spec.delta > 0:
        g = stream.normal(size=spec.n)
        v += spec.delta * (g / np.abs(g).sum())
    return v


def planted_random(
    v,
    k: int,
    stream: RngStream,
    *,
    mixed: bool = True,
    support_size: int | None = None,
) -> PlantedInstance:
    """Plant ``v`` in a random subspace of dimension k + 1.

    Draws an n-by-k matrix of iid standard normals, then hands out the
    basis ``W = [v | vtilde] @ mix``.  With ``mixed=False`` the mix is the
    identity and W's first column is exactly v (useful for debugging, not
    for honest experiments).  ``support_size`` fixes |S|; by default S is
    the exact support of v.
    """
    v = check_vector(v)
    n = v.shape[0]
    if not np.any(v):
        raise ValueError("v must be nonzero")
    if not 1 <= k <= n - 1:
        raise ValueError(f"need 1 <= k <= n - 1, got k={k}, n={n}")

    vtilde = stream.normal(size=(n, k))
    V = np.column_stack([v, vtilde])
    if mixed:
        for _ in range(_MIX_ATTEMPTS):
            mix = stream.normal(size=(k + 1, k + 1))
            if np.linalg.cond(mix) <= MIX_CONDITION_LIMIT:
                break
        else:  # pragma: no cover - (k+1)-square Gaussians virtually never run this dry
            raise NumericalFailureError(
                f"no well-conditioned mix found in {_MIX_ATTEMPTS} draws"
            )
        W = V @ mix
    else:
        mix = np.eye(k + 1)
        W = V

    # Range equality must survive the change of basis.
    Q = orthonormal_basis(W)
    resid = np.linalg.norm(V - Q @ (Q.T @ V))
    if resid > 1e-8 * np.linalg.norm(V):
        raise NumericalFailureError("mixed basis lost the planted span")

    i_star = int(np.argmax(np.abs(v)))
    if support_size is None:
        support_size = int(np.count_nonzero(v))
    S = top_support(v, support_size)
    return PlantedInstance(n=n, k=k, v=v, vtilde=vtilde, W=W, mix=mix, i_star=i_star, S=S)


def pure_random_basis(n: int, k: int, stream: RngStream) -> np.ndarray:
    """n-by-k matrix of iid standard normals (a subspace with no planting)."""
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    return stream.normal(size=(n, k))


def bernoulli_gaussian(n_rows: int, n_cols: int, theta: float, stream: RngStream) -> np.ndarray:
    """Matrix whose entries are 0 w.p. 1 - theta, else standard normal.

    Draw order is frozen: the normal matrix first, then the Bernoulli mask.
    """
    if not 0 < theta <= 1:
        raise ValueError(f"theta must be in (0, 1], got {theta}")
    if n_rows < 1 or n_cols < 1:
        raise ValueError("matrix dimensions must be positive")
    g = stream.normal(size=(n_rows, n_cols))
    mask = stream.uniform(size=(n_rows, n_cols)) < theta
    return g * mask


def projector_diagonal(W) -> np.ndarray:
    """Diagonal of the orthogonal projector onto the column span of W.

    Entry i is the squared l2 norm of row i of an orthonormal basis; the
    entries lie in [0, 1] and sum to rank(W).
    """
    W = check_matrix(W, "W")
    Q = orthonormal_basis(W)
    return np.einsum("ij,ij->i", Q, Q)


# ---------------------------------------------------------------------------
# Flat text persistence: "rows cols" header, then one row of entries per
# line, 17 significant digits.  Enough to round-trip float64 exactly.


def write_matrix(path, A) -> None:
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2:
        raise ValueError(f"write_matrix expects a 2-D array, got shape {A.shape}")
    with open(path, "w") as fh:
        fh.write(f"{A.shape[0]} {A.shape[1]}\n")
        for row in A:
            fh.write(" ".join(format(x, ".17g") for x in row) + "\n")


def read_matrix(path) -> np.ndarray:
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ValueError(f"{path}: malformed header, expected 'rows cols'")
        rows, cols = int(header[0]), int(header[1])
        data = np.loadtxt(fh, ndmin=2)
    if data.size == 0:
        data = data.reshape(0, cols)
    if data.shape != (rows, cols):
        raise ValueError(f"{path}: header says {(rows, cols)}, body has {data.shape}")
    return data


def save_instance(instance: PlantedInstance, directory) -> None:
    """Write a planted instance as text matrices plus a JSON metadata file."""
    os.makedirs(directory, exist_ok=True)
    write_matrix(os.path.join(directory, "v.txt"), instance.v[:, None])
    write_matrix(os.path.join(directory, "vtilde.txt"), instance.vtilde)
    write_matrix(os.path.join(directory, "W.txt"), instance.W)
    write_matrix(os.path.join(directory, "mix.txt"), instance.mix)
    meta = {
        "n": instance.n,
        "k": instance.k,
        "i_star": instance.i_star,
        "S": [int(j) for j in instance.S],
    }
    with open(os.path.join(directory, "meta.json"), "w") as fh:
        json.dump(meta, fh, indent=2)
        fh.write("\n")


def load_instance(directory) -> PlantedInstance:
    with open(os.path.join(directory, "meta.json")) as fh:
        meta = json.load(fh)
    v = read_matrix(os.path.join(directory, "v.txt")).ravel()
    return PlantedInstance(
        n=int(meta["n"]),
        k=int(meta["k"]),
        v=v,
        vtilde=read_matrix(os.path.join(directory, "vtilde.txt")),
        W=read_matrix(os.path.join(directory, "W.txt")),
        mix=read_matrix(os.path.join(directory, "mix.txt")),
        i_star=int(meta["i_star"]),
        S=np.asarray(meta["S"], dtype=np.intp),
    )
