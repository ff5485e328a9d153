"""
Gate library: fixed Cliffords and the parameterized rotation families.

Rotations follow R_P(a) = exp(-i a P / 2). Controlled rotations take
targets ``(control, target)`` and use the generator |1><1| (x) P.
"""

from typing import Optional

import numpy as np

from .qsim import GateOp

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2.0)
S = np.array([[1, 0], [0, 1j]], dtype=complex)
P0 = np.array([[1, 0], [0, 0]], dtype=complex)
P1 = np.array([[0, 0], [0, 1]], dtype=complex)

PAULIS = {"I": I2, "X": X, "Y": Y, "Z": Z}


def controlled(matrix: np.ndarray) -> np.ndarray:
    """Controlled version of a single-qubit matrix, control first."""
    return np.kron(P0, I2) + np.kron(P1, matrix)


def rotation_matrix(generator: np.ndarray, angle: float) -> np.ndarray:
    """exp(-i angle / 2 * M) for a generator with M^3 = M."""
    m2 = generator @ generator
    eye = np.eye(generator.shape[0], dtype=complex)
    return eye + (np.cos(angle / 2.0) - 1.0) * m2 - 1j * np.sin(angle / 2.0) * generator


def rotation(label: str, generator: np.ndarray, targets, angle: float,
             param: Optional[int] = None, scale: float = 1.0) -> GateOp:
    return GateOp(
        matrix=rotation_matrix(generator, angle),
        targets=tuple(targets),
        label=label,
        generator=np.asarray(generator, dtype=complex),
        angle=float(angle),
        param_index=param,
        param_scale=float(scale),
    )


def fixed(label: str, matrix: np.ndarray, *targets: int) -> GateOp:
    return GateOp(matrix=matrix, targets=targets, label=label)


def h(q: int) -> GateOp:
    return fixed("H", H, q)


def x(q: int) -> GateOp:
    return fixed("X", X, q)


def y(q: int) -> GateOp:
    return fixed("Y", Y, q)


def s(q: int) -> GateOp:
    return fixed("S", S, q)


def sdg(q: int) -> GateOp:
    return fixed("Sdg", S.conj().T, q)


def cx(control: int, target: int) -> GateOp:
    return fixed("CX", controlled(X), control, target)


def cy(control: int, target: int) -> GateOp:
    return fixed("CY", controlled(Y), control, target)


def cz(control: int, target: int) -> GateOp:
    return fixed("CZ", controlled(Z), control, target)


def rx(q: int, angle: float, param: Optional[int] = None, scale: float = 1.0) -> GateOp:
    return rotation("RX", X, (q,), angle, param, scale)


def ry(q: int, angle: float, param: Optional[int] = None, scale: float = 1.0) -> GateOp:
    return rotation("RY", Y, (q,), angle, param, scale)


def rz(q: int, angle: float, param: Optional[int] = None, scale: float = 1.0) -> GateOp:
    return rotation("RZ", Z, (q,), angle, param, scale)


def rxx(q0: int, q1: int, angle: float, param: Optional[int] = None, scale: float = 1.0) -> GateOp:
    return rotation("RXX", np.kron(X, X), (q0, q1), angle, param, scale)


def ryy(q0: int, q1: int, angle: float, param: Optional[int] = None, scale: float = 1.0) -> GateOp:
    return rotation("RYY", np.kron(Y, Y), (q0, q1), angle, param, scale)


def rzz(q0: int, q1: int, angle: float, param: Optional[int] = None, scale: float = 1.0) -> GateOp:
    return rotation("RZZ", np.kron(Z, Z), (q0, q1), angle, param, scale)


def crx(control: int, target: int, angle: float, param: Optional[int] = None, scale: float = 1.0) -> GateOp:
    return rotation("CRX", np.kron(P1, X), (control, target), angle, param, scale)


def cry(control: int, target: int, angle: float, param: Optional[int] = None, scale: float = 1.0) -> GateOp:
    return rotation("CRY", np.kron(P1, Y), (control, target), angle, param, scale)


def crz(control: int, target: int, angle: float, param: Optional[int] = None, scale: float = 1.0) -> GateOp:
    return rotation("CRZ", np.kron(P1, Z), (control, target), angle, param, scale)


def xx_plus_yy_generator(beta: float) -> np.ndarray:
    gen = np.zeros((4, 4), dtype=complex)
    gen[1, 2] = np.exp(-1j * beta)
    gen[2, 1] = np.exp(1j * beta)
    return gen


def xx_plus_yy(q0: int, q1: int, angle: float, beta: float,
               param: Optional[int] = None, scale: float = 1.0) -> GateOp:
    """R_{XX+YY}(angle, beta); the middle block rotates |01>, |10>."""
    return rotation("RXX+YY", xx_plus_yy_generator(beta), (q0, q1), angle, param, scale)


def lorentz_y(first: int, second: int, angle: float, param: Optional[int] = None, scale: float = 1.0) -> GateOp:
    """Rotation acting on |01>, |11> of the ordered pair (first, second).

    Equals a Y rotation of ``first`` controlled by ``second``; at angle
    -2t the block is [[cos t, sin t], [-sin t, cos t]].
    """
    return rotation("LY", np.kron(Y, P1), (first, second), angle, param, scale)
