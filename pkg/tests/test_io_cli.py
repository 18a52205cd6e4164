import json
import subprocess
import sys

import numpy as np
import pytest

from qdyn.chain import UPSILON_INF, amplitude_damping_measurement, spin_pvm
from qdyn.channel import choi, random_channel
from qdyn.cli import main
from qdyn.dilation import depolarization_kraus, depolarizing_example
from qdyn.io import (
    DocumentError,
    channel_document,
    decode_matrix,
    document,
    dumps,
    loads,
    matrix_document,
    measurement_document,
    parse_chain_spec,
    parse_channel,
    parse_matrix,
    parse_measurement,
    parse_state,
    read_document,
    state_document,
    write_document,
)
from qdyn.linalg import frob_dist
from qdyn.states import random_density, random_unitary


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


# -- documents ---------------------------------------------------------------------


@pytest.mark.parametrize("seed", range(20))
def test_matrix_round_trip_bit_exact(seed):
    rng = np.random.default_rng(seed)
    m = (rng.normal(size=(3, 4)) + 1j * rng.normal(size=(3, 4))) * 10.0 ** rng.integers(-300, 300)
    back = parse_matrix(loads(dumps(matrix_document(m))))
    np.testing.assert_array_equal(back, m)


def test_channel_and_measurement_round_trip(tmp_path):
    ch = random_channel(3, 4, 2)
    write_document(channel_document(ch), tmp_path / "c.json")
    back = parse_channel(read_document(tmp_path / "c.json"))
    for a, b in zip(ch.kraus, back.kraus):
        np.testing.assert_array_equal(a, b)
    m = amplitude_damping_measurement(0.37)
    back_m = parse_measurement(loads(dumps(measurement_document(m))))
    for a, b in zip(m.ops, back_m.ops):
        np.testing.assert_array_equal(a, b)


def test_state_round_trip():
    rho = random_density(4, seed=8)
    doc = loads(dumps(state_document(rho, [2, 2])))
    assert doc["dims"] == [2, 2]
    np.testing.assert_array_equal(parse_state(doc), rho)


def test_real_entries_accepted():
    np.testing.assert_array_equal(decode_matrix([[1, 0], [0.5, 2]]), [[1, 0], [0.5, 2]])


@pytest.mark.parametrize(
    "data,needle",
    [
        ([[[1, 0], [0, 0]], [[0, 0], "x"]], "row 1, col 1"),
        ([[[1, 0], [0, 0]], [[0, 0]]], "row 1"),
        ([[[1, 0, 0]]], "row 0, col 0"),
        ([[True]], "boolean"),
        ([], "non-empty"),
    ],
)
def test_decode_errors_locate_entry(data, needle):
    with pytest.raises(DocumentError, match=needle):
        decode_matrix(data)


def test_loads_errors():
    with pytest.raises(DocumentError, match="line 2"):
        loads('{"kind": "matrix",\n "dims": [1, 1], "data": [[1]')
    with pytest.raises(DocumentError, match="kind"):
        loads('{"kind": "tensor", "dims": [], "data": []}')
    with pytest.raises(DocumentError, match="dims"):
        loads('{"kind": "matrix", "dims": [0], "data": [[1]]}')
    with pytest.raises(DocumentError, match="data"):
        loads('{"kind": "matrix", "dims": [1, 1]}')
    with pytest.raises(DocumentError):
        loads("[1, 2]")
    with pytest.raises(DocumentError, match="cannot read"):
        read_document("/nonexistent/doc.json")


def test_parse_validation():
    with pytest.raises(DocumentError, match="do not match"):
        parse_matrix(document("matrix", [3, 3], [[1, 0], [0, 1]]))
    with pytest.raises(DocumentError, match="not a valid state"):
        parse_state(document("state", [2], [[2, 0], [0, 0]]))
    with pytest.raises(DocumentError, match="expected a channel"):
        parse_channel(document("matrix", [1, 1], [[1]]))
    with pytest.raises(DocumentError, match="invalid channel"):
        parse_channel(document("channel", [2, 2], [[[1, 0], [0, 1]], [[1, 0], [0, 1]]]))
    with pytest.raises(DocumentError, match="invalid measurement"):
        parse_measurement(document("measurement", [2], [[[2, 0], [0, 0]]]))


def test_parse_chain_specs():
    ctype, rho0, chain, params = parse_chain_spec(
        document("chain-spec", [2], {"type": "amplitude-damping", "gamma": 0.5, "alpha": [0, 0.6], "beta": 0.8})
    )
    assert ctype == "amplitude-damping" and params["alpha"] == 0.6j
    assert abs(rho0[1, 1] - 0.64) < 1e-15
    _, rho0, chain, _ = parse_chain_spec(document("chain-spec", [2], {"type": "stern-gerlach", "axes": ["x"]}))
    np.testing.assert_array_equal(rho0, np.diag([1, 0]))
    z = measurement_document(spin_pvm("z"))["data"]
    _, _, chain, _ = parse_chain_spec(
        document("chain-spec", [2], {"type": "explicit", "measurements": [z], "initial": [[0.5, 0], [0, 0.5]]})
    )
    assert len(chain.steps) == 1
    for bad in ({"type": "nope"}, {"type": "stern-gerlach", "axes": "zx"}, {"type": "amplitude-damping", "gamma": 2}):
        with pytest.raises(DocumentError):
            parse_chain_spec(document("chain-spec", [2], bad))


# -- check-cp --------------------------------------------------------------------------


def test_check_cp_depolarizing(capsys, fixtures_dir):
    code, out, _ = run(capsys, "check-cp", fixtures_dir / "depolarizing_channel.json")
    assert code == 0
    assert "CP, TP" in out and "CompletelyPositive" in out


def test_check_cp_depolarizing_json(capsys, fixtures_dir):
    code, out, _ = run(capsys, "check-cp", fixtures_dir / "depolarizing_channel.json", "--format", "json", "--choi-norm", "state")
    rep = json.loads(out)
    assert code == 0 and rep["cp"] and rep["tp"]
    np.testing.assert_allclose(rep["choi_eigenvalues"], 0.25, atol=1e-15)


def test_check_cp_transpose(capsys, fixtures_dir):
    code, out, _ = run(capsys, "check-cp", fixtures_dir / "transpose_choi.json", "--format", "json")
    rep = json.loads(out)
    assert code == 3
    assert not rep["cp"] and rep["class"] == "Positive"
    assert abs(rep["choi_eigenvalues"][0] + 1) < 1e-12


@pytest.mark.parametrize("name", ["malformed.json", "bad_entry.json", "missing.json"])
def test_check_cp_parse_errors(capsys, fixtures_dir, name):
    code, _, err = run(capsys, "check-cp", fixtures_dir / name)
    assert code == 2
    assert err.startswith("error:")


def test_bad_entry_message(capsys, fixtures_dir):
    _, _, err = run(capsys, "check-cp", fixtures_dir / "bad_entry.json")
    assert "row 1, col 1" in err


# -- dilate / swap-convert -------------------------------------------------------------------


def test_swap_convert_example_fixture(capsys, fixtures_dir, tmp_path):
    out_path = tmp_path / "ch.json"
    code, out, _ = run(
        capsys, "swap-convert", "--state", fixtures_dir / "bell_state.json", "--unitary",
        fixtures_dir / "u_xx_theta0.7.json", "--dims", "2,2", "--out", out_path, "--format", "json",
    )
    rep = json.loads(out)
    assert code == 0 and rep["residual"] < 1e-10
    ch = parse_channel(read_document(out_path))
    assert frob_dist(choi(ch).mat, choi(depolarization_kraus(0.7)).mat) < 1e-9


def test_swap_convert_uncorrelated_matches_dilate(capsys, fixtures_dir, tmp_path):
    args = ["--unitary", fixtures_dir / "u_random4.json", "--dims", "2,2"]
    run(capsys, "swap-convert", "--state", fixtures_dir / "uncorrelated_state.json", *args, "--out", tmp_path / "a.json")
    code, _, _ = run(capsys, "dilate", "--env", fixtures_dir / "uncorrelated_rho_e.json", *args, "--out", tmp_path / "b.json")
    assert code == 0
    rho_s = parse_state(read_document(fixtures_dir / "uncorrelated_rho_s.json"))
    from qdyn.channel import apply

    a = parse_channel(read_document(tmp_path / "a.json"))
    b = parse_channel(read_document(tmp_path / "b.json"))
    assert frob_dist(apply(a, rho_s), apply(b, rho_s)) < 1e-10


def test_swap_convert_wrong_dims(capsys, fixtures_dir):
    code, _, _ = run(capsys, "swap-convert", "--state", fixtures_dir / "bell_state.json", "--unitary",
                     fixtures_dir / "u_xx_theta0.7.json", "--dims", "2,3")
    assert code == 2


def test_swap_convert_missing_dims(capsys, fixtures_dir):
    code, _, _ = run(capsys, "swap-convert", "--state", fixtures_dir / "bell_state.json", "--unitary",
                     fixtures_dir / "u_xx_theta0.7.json")
    assert code == 2


def test_non_unitary_exit_4(capsys, fixtures_dir):
    code, _, err = run(capsys, "swap-convert", "--state", fixtures_dir / "uncorrelated_state.json", "--unitary",
                       fixtures_dir / "not_unitary.json", "--dims", "1,2")
    assert code == 2  # size mismatch is reported before unitarity
    code, _, err = run(capsys, "dilate", "--env", fixtures_dir / "ground_state.json", "--unitary",
                       fixtures_dir / "not_unitary.json", "--dims", "1,2")
    assert code == 4 and "unitary" in err


def test_non_unitary_swap_convert_exit_4(capsys, fixtures_dir, tmp_path):
    u = np.eye(4)
    u[0, 1] = 1
    write_document(matrix_document(u), tmp_path / "u.json")
    code, _, _ = run(capsys, "swap-convert", "--state", fixtures_dir / "bell_state.json", "--unitary",
                     tmp_path / "u.json", "--dims", "2,2")
    assert code == 4


def test_dilate_swap_is_replacement(capsys, fixtures_dir, tmp_path):
    code, out, _ = run(capsys, "dilate", "--env", fixtures_dir / "ground_state.json", "--unitary",
                       fixtures_dir / "swap2.json", "--dims", "2,2", "--out", tmp_path / "r.json")
    assert code == 0 and "Kraus operators: 2" in out
    from qdyn.channel import apply

    ch = parse_channel(read_document(tmp_path / "r.json"))
    np.testing.assert_allclose(apply(ch, random_density(2, seed=3)), np.diag([1, 0]), atol=1e-14)


# -- chain-run -----------------------------------------------------------------------------------


def read_jsonl(path):
    return [json.loads(line) for line in path.read_text().splitlines()]


def test_chain_run_damping(capsys, fixtures_dir, tmp_path):
    out_path = tmp_path / "traj.jsonl"
    code, out, _ = run(capsys, "chain-run", fixtures_dir / "damping_chain.json", "--steps", 200, "--out", out_path)
    assert code == 0 and "Upsilon_inf" in out
    lines = read_jsonl(out_path)
    assert lines[0]["kind"] == "header" and len(lines) == 201
    last = lines[-1]
    ups = parse_matrix(last["transfer"])
    assert frob_dist(ups, UPSILON_INF) < 1e-8
    assert last["asymptotic"]["upsilon_inf_distance"] < 1e-8
    assert last["asymptotic"]["state_max_deviation"] < 1e-10
    assert last["asymptotic"]["closed_form_transfer_deviation"] < 1e-10


def test_chain_run_stern_gerlach(capsys, fixtures_dir, tmp_path):
    out_path = tmp_path / "sg.jsonl"
    run(capsys, "chain-run", fixtures_dir / "stern_gerlach_chain.json", "--steps", 6, "--out", out_path)
    records = read_jsonl(out_path)[1:]
    assert records[0]["transfer"] is None
    for rec in records[1:]:
        np.testing.assert_allclose(parse_matrix(rec["transfer"]), 0.5, atol=1e-12)
        parse_state(rec["state"])


def test_chain_run_zero_steps(capsys, fixtures_dir, tmp_path):
    out_path = tmp_path / "empty.jsonl"
    code, _, _ = run(capsys, "chain-run", fixtures_dir / "damping_chain.json", "--steps", 0, "--out", out_path)
    lines = read_jsonl(out_path)
    assert code == 0 and len(lines) == 1 and lines[0]["kind"] == "header"


def test_chain_run_stdout(capsys, fixtures_dir):
    code, out, _ = run(capsys, "chain-run", fixtures_dir / "stern_gerlach_chain.json", "--steps", 2)
    assert code == 0 and len(out.strip().splitlines()) == 3


def test_chain_run_bad_spec(capsys, fixtures_dir):
    assert run(capsys, "chain-run", fixtures_dir / "depolarizing_channel.json")[0] == 2
    assert run(capsys, "chain-run", fixtures_dir / "damping_chain.json", "--steps", -1)[0] == 2


def test_trajectory_states_round_trip(capsys, fixtures_dir, tmp_path):
    from qdyn.chain import run_chain

    out_path = tmp_path / "t.jsonl"
    run(capsys, "chain-run", fixtures_dir / "damping_chain.json", "--steps", 5, "--out", out_path)
    _, rho0, chain, _ = parse_chain_spec(read_document(fixtures_dir / "damping_chain.json"))
    traj = run_chain(rho0, chain, 5)
    for rec, step in zip(read_jsonl(out_path)[1:], traj[1:]):
        np.testing.assert_array_equal(parse_matrix(rec["state"]), step.rho)


# -- transfer-matrix / weak / bloch -------------------------------------------------------------


def test_transfer_matrix_command(capsys, fixtures_dir):
    code, out, _ = run(capsys, "transfer-matrix", "--state", fixtures_dir / "plus_state.json", "--first",
                       fixtures_dir / "pvm_z.json", "--second", fixtures_dir / "pvm_x.json", "--format", "json")
    rep = json.loads(out)
    assert code == 0
    np.testing.assert_allclose(decode_matrix(rep["transfer"]), 0.5, atol=1e-12)


def test_weak_transfer_matrix_command(capsys, fixtures_dir):
    code, out, _ = run(capsys, "transfer-matrix", "--weak", "--state", fixtures_dir / "ground_state.json",
                       "--first", fixtures_dir / "pvm_z.json", "--second", fixtures_dir / "pvm_x.json")
    assert code == 0 and "degenerate columns: 1" in out


def weak_report(capsys, fixtures_dir, state, obs, post, *extra):
    code, out, _ = run(capsys, "weak", "--state", fixtures_dir / state, "--observable", fixtures_dir / obs,
                       "--post", fixtures_dir / post, "--format", "json", *extra)
    return code, (json.loads(out) if out else None)


def test_weak_eigenstate(capsys, fixtures_dir):
    code, rep = weak_report(capsys, fixtures_dir, "ground_state.json", "observable_z.json", "pvm_x.json")
    assert code == 0
    assert [r["re"] for r in rep["rows"]] == pytest.approx([1.0, 1.0], abs=1e-14)
    assert rep["residual"] < 1e-12


def test_weak_aav(capsys, fixtures_dir):
    code, rep = weak_report(capsys, fixtures_dir, "plus_state.json", "observable_z.json", "post_aav.json")
    psi = np.array([1, 1]) / np.sqrt(2)
    t = np.pi / 8
    phi = np.array([np.cos(t), np.sin(t)])
    expected = (phi @ np.diag([1, -1]) @ psi) / (phi @ psi)
    assert code == 0
    assert abs(complex(rep["rows"][0]["re"], rep["rows"][0]["im"]) - expected) < 1e-12


def test_weak_near_orthogonal(capsys, fixtures_dir):
    _, rep = weak_report(capsys, fixtures_dir, "plus_state.json", "observable_z.json", "post_near_orthogonal.json")
    row = rep["rows"][0]
    t = 3 * np.pi / 4 - 0.01
    phi = np.array([np.cos(t), np.sin(t)])
    psi = np.array([1, 1]) / np.sqrt(2)
    oracle = (phi @ np.diag([1, -1]) @ psi) / (phi @ psi)
    assert row["q"] < 1e-3 and abs(row["re"]) > 10
    assert abs(row["re"] - oracle) < 1e-8 * abs(oracle)
    assert rep["residual"] < 1e-10


def test_weak_zero_post_selection(capsys, fixtures_dir):
    code, _ = weak_report(capsys, fixtures_dir, "ground_state.json", "observable_x.json", "pvm_z.json")
    assert code == 5
    code, rep = weak_report(capsys, fixtures_dir, "ground_state.json", "observable_x.json", "pvm_z.json",
                            "--skip-degenerate")
    assert code == 0 and rep["rows"][1]["degenerate"]


def test_bloch_command(capsys, fixtures_dir):
    code, out, _ = run(capsys, "bloch", "--state", fixtures_dir / "ground_state.json", "--format", "json")
    rep = json.loads(out)
    assert code == 0
    np.testing.assert_allclose(rep["bloch"], [0, 0, np.sqrt(2)], atol=1e-15)


def test_table_output_precision(capsys, fixtures_dir):
    _, out, _ = run(capsys, "bloch", "--state", fixtures_dir / "ground_state.json")
    _, js, _ = run(capsys, "bloch", "--state", fixtures_dir / "ground_state.json", "--format", "json")
    printed = float(out.splitlines()[2].split("=")[1])
    assert printed == json.loads(js)["bloch"][2]


def test_argparse_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["swap-convert", "--dims", "a,b"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2


def test_module_entry_point(fixtures_dir):
    res = subprocess.run(
        [sys.executable, "-m", "qdyn", "check-cp", str(fixtures_dir / "transpose_choi.json")],
        capture_output=True, text=True,
    )
    assert res.returncode == 3 and "not CP" in res.stdout


def test_fixtures_match_builders(fixtures_dir):
    model, _ = depolarizing_example(0.7)
    np.testing.assert_array_equal(parse_matrix(read_document(fixtures_dir / "u_xx_theta0.7.json")), model.u)
    np.testing.assert_array_equal(parse_matrix(read_document(fixtures_dir / "u_random4.json")), random_unitary(4, 13))
