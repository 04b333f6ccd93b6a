"""Dense matrices for every gate kind (used by oracles and the generic kernels).

Two-qubit matrices act on ``|x_a x_b>`` with index ``2 * x_a + x_b`` where
``a`` is the gate's first qubit.
"""

from __future__ import annotations

from math import cos, sin, sqrt

import numpy as np

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / sqrt(2)

PAULI = {"I": I2, "X": X, "Y": Y, "Z": Z}


def pauli_rotation(paulis: str, theta: float) -> np.ndarray:
    """exp(-i theta P / 2) for a Pauli string P (P^2 = 1)."""
    P = np.array([[1.0 + 0j]])
    for ch in paulis:
        P = np.kron(P, PAULI[ch])
    return cos(theta / 2) * np.eye(P.shape[0]) - 1j * sin(theta / 2) * P


def gpi(phi: float) -> np.ndarray:
    return np.array([[0, np.exp(-1j * phi)], [np.exp(1j * phi), 0]])


def gpi2(phi: float) -> np.ndarray:
    return np.array([[1, -1j * np.exp(-1j * phi)], [-1j * np.exp(1j * phi), 1]]) / sqrt(2)


def ms(phi0: float, phi1: float, theta: float) -> np.ndarray:
    c, s = cos(theta / 2), sin(theta / 2)
    return np.array([
        [c, 0, 0, -1j * np.exp(-1j * (phi0 + phi1)) * s],
        [0, c, -1j * np.exp(-1j * (phi0 - phi1)) * s, 0],
        [0, -1j * np.exp(1j * (phi0 - phi1)) * s, c, 0],
        [-1j * np.exp(1j * (phi0 + phi1)) * s, 0, 0, c],
    ])


_ROT_PAULIS = {
    "RX": "X", "RY": "Y", "RZ": "Z",
    "RZZ": "ZZ", "RYZ": "YZ", "RZY": "ZY", "RYY": "YY", "RXX": "XX",
}


def gate_matrix(kind: str, params=()) -> np.ndarray:
    kind = kind.upper()
    if kind == "H":
        return H.copy()
    if kind in _ROT_PAULIS:
        return pauli_rotation(_ROT_PAULIS[kind], params[0])
    if kind == "GPI":
        return gpi(params[0])
    if kind == "GPI2":
        return gpi2(params[0])
    if kind == "MS":
        return ms(*params)
    raise ValueError(f"no matrix for gate kind {kind!r}")
