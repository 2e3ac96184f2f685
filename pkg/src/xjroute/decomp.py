"""Two-qubit synthesis into Rx, Ry and Molmer-Sorensen gates.

Any U(4) factors as ``(k1 x k2) exp(i(a XX + b YY + c ZZ)) (k3 x k4)``.  The
three commuting terms become three MS gates: XX directly, ZZ after a
``Ry(pi/2)`` basis change on both wires, YY after ``Rx(pi/2) Ry(pi/2)``.
Time-ordered, with adjacent single-qubit gates merged, every wire reads::

    Ry Rx Ry | MS | Ry Rx | MS | Ry | MS | Ry Rx Ry

i.e. 3 MS gates and 18 single-qubit rotations.

Conventions: ``Rx(t) = exp(-i t X / 2)``, ``Ry(t) = exp(-i t Y / 2)``,
``MS(chi) = exp(-i chi XX)``; qubit 0 is the left tensor factor.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.transform import Rotation

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
XX, YY, ZZ = np.kron(X, X), np.kron(Y, Y), np.kron(Z, Z)

# columns are the magic (Bell-like) basis; SO(4) in it is SU(2) x SU(2)
MAGIC = np.array(
    [[1, 0, 0, 1j], [0, 1j, 1, 0], [0, 1j, -1, 0], [1, 0, 0, -1j]], dtype=complex
) / math.sqrt(2)

UNITARY_TOL = 1e-10


class DecompositionError(ValueError):
    pass


def rx(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


def ry(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz(theta: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


def ms_matrix(chi: float) -> np.ndarray:
    if not -math.pi / 4 - 1e-12 <= chi <= math.pi / 4 + 1e-12:
        raise DecompositionError(f"MS angle {chi} outside [-pi/4, pi/4]")
    return math.cos(chi) * np.eye(4) - 1j * math.sin(chi) * XX


def is_unitary(u: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    u = np.asarray(u)
    return u.shape[0] == u.shape[1] and np.allclose(u @ u.conj().T, np.eye(len(u)), atol=tol)


def _wrap(theta: float) -> tuple[float, int]:
    """Map an angle into (-pi, pi]; also return k with theta = t + 2 pi k.

    A rotation by ``t`` equals ``(-1)^k`` times the rotation by ``theta``.
    """
    t = math.remainder(theta, 2 * math.pi)
    if t == -math.pi:
        t = math.pi
    return t, round((theta - t) / (2 * math.pi))


def phase_aligned_distance(u: np.ndarray, v: np.ndarray) -> float:
    """Operator-norm distance between ``u`` and ``e^{i phi} v`` at the best phi."""
    tr = np.trace(v.conj().T @ u)
    ph = tr / abs(tr) if abs(tr) > 1e-300 else 1.0
    return float(np.linalg.norm(u - ph * v, 2))


# -- single-qubit blocks -------------------------------------------------


def _zyz(u: np.ndarray) -> tuple[float, float, float, float]:
    """``u = e^{i alpha} Rz(beta) Ry(gamma) Rz(delta)``."""
    det = np.linalg.det(u)
    alpha = np.angle(det) / 2
    w = u * np.exp(-1j * alpha)  # now in SU(2)
    a, b = w[0, 0], w[1, 0]
    gamma = 2 * math.atan2(abs(b), abs(a))
    if abs(b) < 1e-14:
        beta, delta = -2 * np.angle(a), 0.0
    elif abs(a) < 1e-14:
        beta, delta = 2 * np.angle(b), 0.0
    else:
        s, d = -2 * np.angle(a), 2 * np.angle(b)
        beta, delta = (s + d) / 2, (s - d) / 2
    v = rz(beta) @ ry(gamma) @ rz(delta)
    # w and v agree up to a sign; fold it into the phase
    if np.linalg.norm(w - v) > np.linalg.norm(w + v):
        alpha += math.pi
    return float(alpha), float(beta), float(gamma), float(delta)


def _axis_rotation(axis: np.ndarray, theta: float) -> np.ndarray:
    nx, ny, nz = axis
    return math.cos(theta / 2) * I2 - 1j * math.sin(theta / 2) * (nx * X + ny * Y + nz * Z)


def _frame(n: np.ndarray, m: np.ndarray) -> np.ndarray:
    """SU(2) element rotating z onto ``n`` and y onto ``m``."""
    rot = np.column_stack([np.cross(m, n), m, n])
    q = Rotation.from_matrix(rot).as_quat()  # x, y, z, w
    return q[3] * I2 - 1j * (q[0] * X + q[1] * Y + q[2] * Z)


def single_qubit_axis_decompose(
    u: np.ndarray, n=(0.0, 1.0, 0.0), m=(1.0, 0.0, 0.0)
) -> tuple[float, float, float, float]:
    """``u = e^{i alpha} R_n(beta) R_m(gamma) R_n(delta)``.

    The axes must be orthogonal unit vectors; defaults give Ry Rx Ry.
    """
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2) or not is_unitary(u):
        raise DecompositionError("expected a 2x2 unitary")
    n, m = np.asarray(n, float), np.asarray(m, float)
    if abs(np.linalg.norm(n) - 1) > 1e-9 or abs(np.linalg.norm(m) - 1) > 1e-9:
        raise DecompositionError("axes must be unit vectors")
    if abs(n @ m) > 1e-9:
        raise DecompositionError("only orthogonal axis pairs are supported")
    c = _frame(n, m)
    alpha, *angles = _zyz(c.conj().T @ u @ c)
    out = []
    for a in angles:
        t, k = _wrap(a)
        alpha += k * math.pi
        out.append(t)
    return (math.remainder(alpha, 2 * math.pi), *out)


# -- circuits --------------------------------------------------------------


@dataclass(frozen=True)
class Gate:
    name: str  # "Rx" | "Ry" | "MS"
    angle: float
    qubit: int | None = None  # None for MS

    def matrix(self) -> np.ndarray:
        if self.name == "MS":
            return ms_matrix(self.angle)
        if self.name not in ("Rx", "Ry") or self.qubit not in (0, 1):
            raise DecompositionError(f"malformed gate {self}")
        r = rx(self.angle) if self.name == "Rx" else ry(self.angle)
        return np.kron(r, I2) if self.qubit == 0 else np.kron(I2, r)

    def to_dict(self) -> dict:
        if self.name == "MS":
            return {"gate": "MS", "chi": self.angle}
        return {"gate": self.name, "theta": self.angle, "qubit": self.qubit}


@dataclass
class NativeCircuit:
    gates: list[Gate] = field(default_factory=list)
    phase: float = 0.0  # global phase, so evaluate() can reproduce U exactly

    @property
    def ms_count(self) -> int:
        return sum(g.name == "MS" for g in self.gates)

    @property
    def single_qubit_count(self) -> int:
        return sum(g.name != "MS" for g in self.gates)

    def wire_pattern(self, qubit: int) -> str:
        """Gate names seen by one wire, MS blocks shown as ``|``."""
        out = []
        for g in self.gates:
            if g.name == "MS":
                out.append("|")
            elif g.qubit == qubit:
                out.append(g.name)
        return " ".join(out)

    def to_json(self) -> str:
        return json.dumps({"phase": self.phase, "gates": [g.to_dict() for g in self.gates]})

    def describe(self) -> str:
        lines = []
        for q in (0, 1):
            parts = []
            for g in self.gates:
                if g.name == "MS":
                    parts.append(f"[MS {g.angle:+.4f}]")
                elif g.qubit == q:
                    parts.append(f"{g.name}({g.angle:+.4f})")
            lines.append(f"q{q}: " + " ".join(parts))
        return "\n".join(lines)


def evaluate_circuit(circuit: NativeCircuit, with_phase: bool = True) -> np.ndarray:
    u = np.eye(4, dtype=complex)
    for g in circuit.gates:
        u = g.matrix() @ u
    return u * np.exp(1j * circuit.phase) if with_phase else u


# -- canonical decomposition --------------------------------------------------


def _kron_factor(k: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split a local 4x4 unitary into ``a x b`` with both factors unitary."""
    r = k.reshape(2, 2, 2, 2).transpose(0, 2, 1, 3).reshape(4, 4)
    uu, s, vh = np.linalg.svd(r)
    if s[1] > 1e-6 * s[0]:
        raise DecompositionError("block is not a tensor product")
    a = (math.sqrt(s[0]) * uu[:, 0]).reshape(2, 2)
    b = (math.sqrt(s[0]) * vh[0, :]).reshape(2, 2)
    scale = math.sqrt(abs(np.linalg.det(a)))
    return a / scale, b * scale


def _real_eigenbasis(m: np.ndarray) -> np.ndarray:
    """Real orthogonal P with ``P^T m P`` diagonal, for symmetric unitary ``m``.

    Re(m) and Im(m) commute, so one real symmetric mix of them shares the
    eigenvectors.  The mixing angle is picked from a fixed grid to keep
    distinct eigenvalues of ``m`` well separated; degenerate eigenvalues of
    ``m`` may share any basis.
    """
    lam = np.linalg.eigvals(m)
    pairs = [(i, j) for i in range(4) for j in range(i + 1, 4) if abs(lam[i] - lam[j]) > 1e-9]
    best_s, best_gap = 0.0, -1.0
    for s in np.linspace(0, math.pi, 48, endpoint=False):
        proj = (lam * np.exp(-1j * s)).real
        gap = min((abs(proj[i] - proj[j]) for i, j in pairs), default=1.0)
        if gap > best_gap + 1e-12:
            best_s, best_gap = s, gap
    mix = math.cos(best_s) * m.real + math.sin(best_s) * m.imag
    _, p = np.linalg.eigh((mix + mix.T) / 2)
    for k in range(4):
        lead = next(x for x in p[:, k] if abs(x) > 1e-12)
        if lead < 0:
            p[:, k] = -p[:, k]
    if np.linalg.det(p) < 0:
        p[:, -1] = -p[:, -1]
    return p


# rows: [1, x_k, y_k, z_k] with x_k the magic-basis eigenvalues of XX, etc.
_DIAG = np.column_stack(
    [np.ones(4)] + [np.real(np.diag(MAGIC.conj().T @ P @ MAGIC)) for P in (XX, YY, ZZ)]
)


@dataclass
class Canonical:
    """``e^{i phase} (k1 x k2) exp(i(a XX + b YY + c ZZ)) (k3 x k4)``."""

    phase: float
    k1: np.ndarray
    k2: np.ndarray
    a: float
    b: float
    c: float
    k3: np.ndarray
    k4: np.ndarray

    def core(self) -> np.ndarray:
        h = self.a * XX + self.b * YY + self.c * ZZ
        w, v = np.linalg.eigh(h)
        return (v * np.exp(1j * w)) @ v.conj().T

    def matrix(self) -> np.ndarray:
        return (
            np.exp(1j * self.phase)
            * np.kron(self.k1, self.k2) @ self.core() @ np.kron(self.k3, self.k4)
        )


def canonical_decompose(u: np.ndarray) -> Canonical:
    u = np.asarray(u, dtype=complex)
    if u.shape != (4, 4) or not is_unitary(u):
        raise DecompositionError("input is not a 4x4 unitary")
    up = MAGIC.conj().T @ u @ MAGIC
    p = _real_eigenbasis(up.T @ up)
    d = np.diag(p.T @ up.T @ up @ p)
    theta = np.angle(d) / 2
    k1 = up @ p @ np.diag(np.exp(-1j * theta))
    if np.linalg.det(k1.real) < 0:
        theta[0] += math.pi
        k1[:, 0] = -k1[:, 0]
    left = MAGIC @ k1.real @ MAGIC.conj().T
    right = MAGIC @ p.T @ MAGIC.conj().T
    phase, a, b, c = np.linalg.solve(_DIAG, theta)
    # fold each angle into [-pi/4, pi/4]; exp(i k pi/2 P) = (iP)^k commutes
    # with the core and is local, so it moves into the right-hand layer
    corr = np.eye(4, dtype=complex)
    folded = []
    for ang, pauli in ((a, XX), (b, YY), (c, ZZ)):
        k = round(ang / (math.pi / 2))
        folded.append(ang - k * math.pi / 2)
        corr = corr @ np.linalg.matrix_power(1j * pauli, k % 4)
    right = corr @ right
    k1_, k2_ = _kron_factor(left)
    k3_, k4_ = _kron_factor(right)
    out = Canonical(float(phase), k1_, k2_, *folded, k3_, k4_)
    # the tensor split leaves a global phase behind; recover it exactly
    v = out.matrix()
    out.phase += float(np.angle(np.trace(v.conj().T @ u)))
    return out


# basis changes taking XX to ZZ and to YY under conjugation
H_ZZ = ry(math.pi / 2)
H_YY = rx(math.pi / 2) @ ry(math.pi / 2)


def _euler_gates(u: np.ndarray, qubit: int) -> tuple[list[Gate], float]:
    """Time-ordered Ry, Rx, Ry realising ``u`` up to the returned phase."""
    alpha, beta, gamma, delta = single_qubit_axis_decompose(u)
    return [Gate("Ry", delta, qubit), Gate("Rx", gamma, qubit), Gate("Ry", beta, qubit)], alpha


def _local_block(k0: np.ndarray, k1: np.ndarray) -> tuple[list[Gate], float]:
    g0, p0 = _euler_gates(k0, 0)
    g1, p1 = _euler_gates(k1, 1)
    return g0 + g1, p0 + p1


def _pre_merge(can: Canonical) -> NativeCircuit:
    """Unoptimised template: every factor expanded on its own."""
    alpha, beta, gamma = -can.c, -can.a, -can.b
    gates: list[Gate] = []
    phase = can.phase
    blk, ph = _local_block(can.k3, can.k4)
    gates += blk
    phase += ph
    for q in (0, 1):  # H_YY^dagger = Ry(-pi/2) Rx(-pi/2): Rx first in time
        gates += [Gate("Rx", -math.pi / 2, q), Gate("Ry", -math.pi / 2, q)]
    gates.append(Gate("MS", gamma))
    for q in (0, 1):
        gates += [Gate("Ry", math.pi / 2, q), Gate("Rx", math.pi / 2, q)]
    gates.append(Gate("MS", beta))
    for q in (0, 1):
        gates.append(Gate("Ry", -math.pi / 2, q))
    gates.append(Gate("MS", alpha))
    for q in (0, 1):
        gates.append(Gate("Ry", math.pi / 2, q))
    blk, ph = _local_block(can.k1, can.k2)
    gates += blk
    phase += ph
    return NativeCircuit(gates, phase)


def merge_single_qubit_runs(circuit: NativeCircuit, max_run: int = 3) -> NativeCircuit:
    """Collapse runs of more than ``max_run`` rotations on a wire into Ry Rx Ry."""
    out: list[Gate] = []
    phase = circuit.phase
    pending: dict[int, list[Gate]] = {0: [], 1: []}

    def flush() -> None:
        nonlocal phase
        for q in (0, 1):
            run = pending[q]
            if len(run) > max_run:
                m = I2
                for g in run:
                    r = rx(g.angle) if g.name == "Rx" else ry(g.angle)
                    m = r @ m
                blk, ph = _euler_gates(m, q)
                out.extend(blk)
                phase += ph
            else:
                out.extend(run)
            pending[q] = []

    for g in circuit.gates:
        if g.name == "MS":
            flush()
            out.append(g)
        else:
            pending[g.qubit].append(g)
    flush()
    return NativeCircuit(out, phase)


def decompose_su4(u: np.ndarray, merge: bool = True) -> NativeCircuit:
    """Exact 3-MS, 18-rotation circuit for any two-qubit unitary."""
    circ = _pre_merge(canonical_decompose(u))
    return merge_single_qubit_runs(circ) if merge else circ


# -- presets -------------------------------------------------------------------


def preset(name: str) -> np.ndarray:
    name = name.strip().lower()
    if name == "identity":
        return np.eye(4, dtype=complex)
    if name == "cnot":
        return np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
    if name == "swap":
        return np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)
    if name == "iswap":
        return np.array([[1, 0, 0, 0], [0, 0, 1j, 0], [0, 1j, 0, 0], [0, 0, 0, 1]], dtype=complex)
    if name.startswith("ms:"):
        return ms_matrix(float(name[3:]))
    raise DecompositionError(f"unknown preset {name!r}")


PRESETS = ("identity", "cnot", "swap", "iswap", "ms:<chi>")


def unitary_from_json(text: str) -> np.ndarray:
    """4x4 matrix from JSON; complex entries as ``[re, im]`` pairs or numbers."""
    rows = json.loads(text)
    mat = np.array(
        [[complex(x[0], x[1]) if isinstance(x, list) else complex(x) for x in row] for row in rows]
    )
    if mat.shape != (4, 4):
        raise DecompositionError(f"expected a 4x4 matrix, got shape {mat.shape}")
    return mat
