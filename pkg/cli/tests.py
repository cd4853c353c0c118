"""
Command-line tests: every command end to end through ``main``.

Run with:
    pytest cli/tests.py
"""
import json

import pytest

from mec.tests import EXAMPLE_1, EXAMPLE_2, EXAMPLE_3, WORKED_EXAMPLE

from cli.app import EXIT_INSUFFICIENT, EXIT_INVARIANT, EXIT_OK, EXIT_PRECONDITION, main
from cli.services.manifest import code_from_manifest, code_hash

PAYLOAD = b"monotone erasure codes split files across nodes\n"


@pytest.fixture
def tree_file(tmp_path):
    def write(text, name="tree.txt"):
        path = tmp_path / name
        path.write_text(f"# access tree\n{text}\n")
        return str(path)
    return write


@pytest.fixture
def scenario_file(tmp_path):
    def write(**overrides):
        obj = {"quorum": {"threshold": {"n": 4, "f": 1}}, "dealer": "p1", "file": {"symbols": [1, 3]}}
        obj.update(overrides)
        path = tmp_path / "scenario.json"
        path.write_text(json.dumps(obj))
        return str(path)
    return write


def out_lines(capsys):
    return capsys.readouterr().out.splitlines()


def test_params_lp_example(tree_file, capsys):
    assert main(["params", "--tree", tree_file(EXAMPLE_1), "--method", "lp"]) == EXIT_OK
    lines = out_lines(capsys)
    assert lines[0] == "k=5 m=7 beta=2/5 q=7"
    assert lines[1:] == ["  a: 2", "  b: 2", "  c: 1", "  d: 1", "  e: 1"]


def test_params_optimal_example_3(tree_file, capsys):
    assert main(["params", "--tree", tree_file(EXAMPLE_3), "--method", "optimal"]) == EXIT_OK
    assert out_lines(capsys)[0].startswith("k=2 m=5 beta=3/2")


def test_params_uniform_versus_optimal(tree_file, capsys):
    path = tree_file(EXAMPLE_2)
    main(["params", "--tree", path, "--method", "uniform", "--json"])
    uniform = json.loads(capsys.readouterr().out)
    main(["params", "--tree", path, "--method", "optimal", "--json"])
    optimal = json.loads(capsys.readouterr().out)
    assert (uniform['beta'], optimal['beta']) == ("3/2", "1")


def test_params_lp_matches_optimal_on_partitioned_trees(tree_file, capsys):
    path = tree_file(EXAMPLE_3)
    betas = []
    for method in ("lp", "optimal"):
        main(["params", "--tree", path, "--method", method, "--json"])
        betas.append(json.loads(capsys.readouterr().out)['beta'])
    assert betas[0] == betas[1]


def test_params_rejects_non_partitioned_tree(tree_file, capsys):
    assert main(["params", "--tree", tree_file(EXAMPLE_1), "--method", "uniform"]) == EXIT_PRECONDITION
    assert capsys.readouterr().err.startswith("error:")


def test_missing_and_malformed_inputs(tree_file, tmp_path, capsys):
    assert main(["params", "--tree", str(tmp_path / "nope.txt")]) == EXIT_PRECONDITION
    assert main(["params", "--tree", tree_file("(4 a b c)")]) == EXIT_PRECONDITION
    assert "error:" in capsys.readouterr().err


def test_build_and_check_worked_example(tree_file, tmp_path, capsys):
    tree = tree_file(WORKED_EXAMPLE)
    manifest = str(tmp_path / "code.json")
    assert main(["build", "--tree", tree, "--method", "kronecker", "--out", manifest]) == EXIT_OK
    assert main(["check", "--manifest", manifest, "--tree", tree]) == EXIT_OK
    assert out_lines(capsys)[-1] == "complete: 14 access sets verified"


def test_check_reports_incomplete_code(tree_file, tmp_path, capsys):
    manifest = str(tmp_path / "code.json")
    main(["build", "--tree", tree_file("(2 a b c)"), "--method", "lp", "--out", manifest])
    assert main(["check", "--manifest", manifest, "--tree", tree_file("(1 a b c)", "or.txt")]) == EXIT_INSUFFICIENT


def test_manifests_are_deterministic(tree_file, tmp_path):
    tree = tree_file(EXAMPLE_1)
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    main(["build", "--tree", tree, "--out", str(first)])
    main(["build", "--tree", tree, "--out", str(second)])
    assert first.read_bytes() == second.read_bytes()
    manifest = json.loads(first.read_text())
    assert manifest['provenance']['tool'] == 'mec'
    assert set(manifest['provenance']['inputs']) == {'tree'}
    assert code_hash(code_from_manifest(manifest)) == manifest['code_hash']


def test_tampered_manifest_is_rejected(tree_file, tmp_path):
    path = tmp_path / "code.json"
    main(["build", "--tree", tree_file(EXAMPLE_1), "--out", str(path)])
    manifest = json.loads(path.read_text())
    manifest['generator'][0][0] = (manifest['generator'][0][0] + 1) % manifest['q']
    path.write_text(json.dumps(manifest))
    assert main(["check", "--manifest", str(path), "--tree", tree_file(EXAMPLE_1, "t2.txt")]) == EXIT_PRECONDITION


@pytest.fixture
def encoded(tree_file, tmp_path):
    manifest = str(tmp_path / "code.json")
    main(["build", "--tree", tree_file(EXAMPLE_1), "--method", "lp", "--out", manifest])
    source = tmp_path / "input.bin"
    source.write_bytes(PAYLOAD)
    out = tmp_path / "fragments"
    assert main(["encode", "--code", manifest, "--file", str(source), "--out", str(out)]) == EXIT_OK
    return manifest, out


def test_encode_writes_fragments_and_encoding(encoded):
    _, out = encoded
    encoding = json.loads((out / "encoding.json").read_text())
    assert encoding['byte_length'] == len(PAYLOAD)
    assert encoding['symbol_bits'] == 2
    assert encoding['stripes'] == -(-len(PAYLOAD) * 8 // 2 // 5)
    a = json.loads((out / "a.frag.json").read_text())
    assert a['code_hash'] == encoding['code_hash']
    assert len(a['symbols']) == 2 * encoding['stripes']


@pytest.mark.parametrize("nodes", ["a,b,c", "b,c,d,e", None])
def test_decode_round_trip(encoded, tmp_path, nodes):
    manifest, out = encoded
    target = tmp_path / "recovered.bin"
    argv = ["decode", "--code", manifest, "--dir", str(out), "--out", str(target)]
    if nodes:
        argv += ["--nodes", nodes]
    assert main(argv) == EXIT_OK
    assert target.read_bytes() == PAYLOAD


def test_decode_insufficient(encoded, tmp_path, capsys):
    manifest, out = encoded
    code = ["decode", "--code", manifest, "--dir", str(out), "--out", str(tmp_path / "x"), "--nodes", "a,b"]
    assert main(code) == EXIT_INSUFFICIENT
    assert "insufficient" in capsys.readouterr().err


def test_decode_with_missing_fragment_files(encoded, tmp_path):
    manifest, out = encoded
    (out / "c.frag.json").unlink()
    argv = ["decode", "--code", manifest, "--dir", str(out), "--out", str(tmp_path / "x")]
    assert main(argv) == EXIT_OK
    assert main(argv + ["--nodes", "a,b,c"]) == EXIT_PRECONDITION


def test_manifest_and_fragment_file_layout(tree_file, tmp_path):
    manifest_path = tmp_path / "code.json"
    assert main(["build", "--tree", tree_file(EXAMPLE_3), "--method", "optimal",
                 "--out", str(manifest_path)]) == EXIT_OK
    manifest = json.loads(manifest_path.read_text())
    assert {'q', 'k', 'm', 'columns_per_node', 'generator', 'labeling', 'code_hash'} <= set(manifest)
    assert manifest['columns_per_node']['p2'] == 0
    assert sum(manifest['columns_per_node'].values()) == manifest['m'] == len(manifest['labeling'])
    assert len(manifest['generator']) == manifest['k']
    assert all(len(row) == manifest['m'] for row in manifest['generator'])

    source = tmp_path / "input.bin"
    source.write_bytes(PAYLOAD)
    out = tmp_path / "fragments"
    assert main(["encode", "--code", str(manifest_path), "--file", str(source), "--out", str(out)]) == EXIT_OK
    p1 = json.loads((out / "p1.frag.json").read_text())
    p2 = json.loads((out / "p2.frag.json").read_text())
    assert set(p1) == set(p2) == {'code_hash', 'node', 'symbols'}
    assert p1['code_hash'] == p2['code_hash'] == manifest['code_hash']
    assert p2['node'] == 'p2' and p2['symbols'] is None
    assert len(p1['symbols']) > 0

    target = tmp_path / "recovered.bin"
    assert main(["decode", "--code", str(manifest_path), "--dir", str(out), "--out", str(target)]) == EXIT_OK
    assert target.read_bytes() == PAYLOAD


def test_decode_rejects_fragments_of_another_code(encoded, tmp_path):
    manifest, out = encoded
    path = out / "a.frag.json"
    fragment = json.loads(path.read_text())
    fragment['code_hash'] = "0" * 64
    path.write_text(json.dumps(fragment))
    argv = ["decode", "--code", manifest, "--dir", str(out), "--out", str(tmp_path / "x")]
    assert main(argv) == EXIT_PRECONDITION


def test_systems_threshold(tmp_path, capsys):
    path = tmp_path / "quorum.json"
    path.write_text(json.dumps({"threshold": {"n": 4, "f": 1}}))
    assert main(["systems", "--quorum", str(path)]) == EXIT_OK
    lines = {line.split(' ')[0]: line for line in out_lines(capsys)}
    assert lines['kernels'].startswith("kernels (6):")
    assert lines['reliable'].startswith("reliable (4):")
    assert lines['fail-prone'].startswith("fail-prone (4):")


def test_systems_rejects_inconsistent_quorums(tmp_path):
    path = tmp_path / "quorum.json"
    path.write_text(json.dumps({"universe": ["a", "b", "c"], "quorums": [["a"], ["b"]]}))
    assert main(["systems", "--quorum", str(path)]) == EXIT_PRECONDITION


def test_sim_honest(scenario_file, tmp_path, capsys):
    transcript = tmp_path / "run.jsonl"
    assert main(["sim", "--scenario", scenario_file(retriever="p2"), "--transcript", str(transcript)]) == EXIT_OK
    lines = out_lines(capsys)
    assert lines[0] == "stored: 4/4"
    assert "retrieved: yes" in lines
    events = [json.loads(line) for line in transcript.read_text().splitlines()]
    assert sum(1 for e in events if e['kind'] in ('send', 'echo', 'ready')) == 36


def test_sim_transcripts_are_reproducible(scenario_file, tmp_path):
    path = scenario_file(seed=3)
    first, second = tmp_path / "1.jsonl", tmp_path / "2.jsonl"
    main(["sim", "--scenario", path, "--transcript", str(first)])
    main(["sim", "--scenario", path, "--transcript", str(second)])
    assert first.read_bytes() == second.read_bytes()


def test_sim_json_and_liveness_failure(scenario_file, capsys):
    assert main(["sim", "--scenario", scenario_file(step_cap=3), "--json"]) == EXIT_INVARIANT
    captured = capsys.readouterr()
    report = json.loads(captured.out[:captured.out.rindex('}') + 1])
    assert report['capped'] is True
    assert "violation: liveness" in captured.out


def test_sim_rejects_bad_scenario(scenario_file):
    assert main(["sim", "--scenario", scenario_file(corrupt=["p1", "p2"])]) == EXIT_PRECONDITION


def test_sweep(scenario_file, capsys):
    path = scenario_file(corrupt=["p1"], behaviors={"p1": "equivocate"})
    assert main(["sweep", "--scenario", path, "--seeds", "20"]) == EXIT_OK
    lines = out_lines(capsys)
    assert lines[0] == "runs: 20"
    assert "violations: 0" in lines


def test_render(tree_file, tmp_path, capsys):
    out = tmp_path / "tree.png"
    assert main(["render", "--tree", tree_file(WORKED_EXAMPLE), "--out", str(out)]) == EXIT_OK
    assert out.stat().st_size > 0
    assert out_lines(capsys) == [f"wrote {out}: 13 vertices"]


def test_basic(tree_file, tmp_path, capsys):
    source = tmp_path / "input.bin"
    source.write_bytes(b"\x05")
    out = tmp_path / "basic"
    assert main(["basic", "--tree", tree_file(EXAMPLE_1), "--file", str(source), "--out", str(out)]) == EXIT_OK
    info = json.loads((out / "basic.json").read_text())
    assert info['byte_length'] == 1
    assert (8 + info['pad_bits']) % info['unit'] == 0
    assert sorted(p.name for p in out.glob("*.chunks.json")) == [f"{n}.chunks.json" for n in "abcde"]
