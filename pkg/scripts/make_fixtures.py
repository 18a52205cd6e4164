"""Regenerate the JSON fixtures under fixtures/."""

from pathlib import Path

import numpy as np

from qdyn.chain import spin_pvm, pvm
from qdyn.channel import transpose_map_choi
from qdyn.dilation import PAULI_X, PAULI_Z, depolarization_kraus, depolarizing_example, swap_gate
from qdyn.io import (
    channel_document,
    document,
    matrix_document,
    measurement_document,
    state_document,
    write_document,
)
from qdyn.linalg import kron
from qdyn.states import projector, random_density, random_unitary

OUT = Path(__file__).resolve().parent.parent / "fixtures"


def main():
    OUT.mkdir(exist_ok=True)
    theta = 0.7
    model, expected = depolarizing_example(theta)
    write_document(state_document(model.rho_se, [2, 2]), OUT / "bell_state.json")
    write_document(matrix_document(model.u), OUT / "u_xx_theta0.7.json")
    write_document(channel_document(depolarization_kraus(theta)), OUT / "depolarizing_channel.json")
    write_document(matrix_document(transpose_map_choi(2).mat), OUT / "transpose_choi.json")

    rho_s = random_density(2, seed=11)
    rho_e = random_density(2, seed=12)
    write_document(state_document(kron(rho_s, rho_e), [2, 2]), OUT / "uncorrelated_state.json")
    write_document(state_document(rho_s), OUT / "uncorrelated_rho_s.json")
    write_document(state_document(rho_e), OUT / "uncorrelated_rho_e.json")
    write_document(matrix_document(random_unitary(4, seed=13)), OUT / "u_random4.json")

    write_document(state_document(projector([1, 0])), OUT / "ground_state.json")
    write_document(matrix_document(swap_gate(2)), OUT / "swap2.json")
    write_document(matrix_document(np.array([[1, 1], [0, 1]])), OUT / "not_unitary.json")

    write_document(
        document("chain-spec", [2], {"type": "amplitude-damping", "gamma": 0.9, "alpha": 0.0, "beta": 1.0}),
        OUT / "damping_chain.json",
    )
    write_document(document("chain-spec", [2], {"type": "stern-gerlach", "axes": ["z", "x"]}), OUT / "stern_gerlach_chain.json")
    write_document(measurement_document(spin_pvm("z")), OUT / "pvm_z.json")
    write_document(measurement_document(spin_pvm("x")), OUT / "pvm_x.json")
    write_document(matrix_document(PAULI_Z), OUT / "observable_z.json")
    write_document(matrix_document(PAULI_X), OUT / "observable_x.json")

    # pre-selection |+>, post-selection onto |phi> nearly orthogonal to it
    plus = np.array([1, 1]) / np.sqrt(2)
    write_document(state_document(projector(plus)), OUT / "plus_state.json")
    t = 3 * np.pi / 4 - 0.01
    phi = np.array([np.cos(t), np.sin(t)])
    phi_perp = np.array([-np.sin(t), np.cos(t)])
    write_document(measurement_document(pvm([phi, phi_perp])), OUT / "post_near_orthogonal.json")
    t = np.pi / 8
    write_document(
        measurement_document(pvm([[np.cos(t), np.sin(t)], [-np.sin(t), np.cos(t)]])),
        OUT / "post_aav.json",
    )

    (OUT / "malformed.json").write_text('{"kind": "channel", "dims": [2, 2], "data": [[[1, 0], [0\n')
    (OUT / "bad_entry.json").write_text(
        '{"kind": "matrix", "dims": [2, 2], "data": [[[1, 0], [0, 0]], [[0, 0], "x"]]}\n'
    )


if __name__ == "__main__":
    main()
