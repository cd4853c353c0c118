"""
Test suite for dispersal: commitments, the server state machines, retrieval
and the simulator's property sweeps.

Run with:
    pytest gavid/tests.py
"""
import dataclasses
import json
import random

import pytest

from mec.access import Universe, threshold_quorum_context
from mec.codes import FragmentVector, block_labeling, mds_code
from mec.errors import PreconditionError, ScenarioError
from mec.field import FieldSpec

from gavid.adversary import Behavior, forge_commitment
from gavid.commitment import (DIGEST_SIZE, MerkleCommitment, VectorCommitment, digest,
                              fragment_bytes, fragment_digest, merkle_build, merkle_depth,
                              merkle_verify)
from gavid.messages import HEADER_BYTES, MessageKind, OutputKind, ProtocolMessage
from gavid.retrieve import handle_retrieve, retrieve_init
from gavid.scenario import scenario_from_dict
from gavid.server import GavidConfig, commit_file, disperse_init, handle_message, new_state
from gavid.simnet import check_execution, committed_value, run, sweep

THRESHOLD_4 = {"threshold": {"n": 4, "f": 1}}
FIVE_NODE = {
    "universe": ["p1", "p2", "p3", "p4", "p5"],
    "quorums": [["p3", "p4", "p5"], ["p1", "p2", "p4", "p5"],
                ["p1", "p2", "p3", "p5"], ["p1", "p2", "p3", "p4"]],
}

# (name, scenario overrides, dealer is honest)
ADVERSARIES = [
    ('honest', {}, True),
    ('crash-dealer', {'corrupt': ['p1'], 'behaviors': {'p1': {'kind': 'crash', 'crash_after': 2}}}, False),
    ('equivocating-dealer', {'corrupt': ['p1'], 'behaviors': {'p1': 'equivocate'}}, False),
    ('corrupt-fragment', {'corrupt': ['p2'], 'behaviors': {'p2': 'corrupt-fragment'}}, True),
    ('garbage-dealer', {'corrupt': ['p1'], 'behaviors': {'p1': 'garbage-dealer'}}, False),
]
SWEEP_SEEDS = 50


def scenario(quorum=None, **overrides):
    obj = {"quorum": quorum or THRESHOLD_4, "dealer": "p1", "file": {"random": {"seed": 7}}}
    obj.update(overrides)
    return scenario_from_dict(obj)


def honest_kinds(result):
    return sorted(out.kind.value if out else 'none' for out in result.honest_outputs().values())


# ---------------------------------------------------------------------------
# commitments

def test_fragment_bytes_layout():
    assert fragment_bytes(1, (5,)) == b'MEC1' + bytes([0, 0, 0, 1, 0, 0, 0, 1]) + (5).to_bytes(8, 'big')
    assert fragment_bytes(2, None) == b'MEC1' + bytes([0, 0, 0, 2]) + b'\xff' * 4
    assert fragment_bytes(3, ()) == b'MEC1' + bytes([0, 0, 0, 3, 0, 0, 0, 0])


def test_vector_commitment_covers_absent_fragments():
    universe = Universe(["a", "b", "c"])
    fragments = FragmentVector(universe, [(1, 2), None, (3,)])
    commitment, proofs = VectorCommitment().commit(fragments)
    assert len(commitment) == DIGEST_SIZE * 3
    assert commitment[DIGEST_SIZE:2 * DIGEST_SIZE] == fragment_digest(2, None)
    assert proofs == ((), (), ())
    scheme = VectorCommitment()
    assert scheme.verify(universe.node("b"), None, commitment, (), 3)
    assert not scheme.verify(universe.node("b"), (), commitment, (), 3)
    assert not scheme.verify(universe.node("a"), (1, 3), commitment, (), 3)


@pytest.mark.parametrize("n,depth", [(1, 0), (2, 1), (3, 2), (4, 2), (5, 3), (8, 3), (9, 4)])
def test_merkle_depth(n, depth):
    assert merkle_depth(n) == depth


def test_merkle_single_leaf():
    g = fragment_bytes(1, (4,))
    tree = merkle_build([digest(g)])
    assert tree.root == digest(g)
    assert tree.fingerprint(0) == ()
    assert merkle_verify(0, g, (), tree.root)


@pytest.mark.parametrize("n", range(2, 10))
def test_merkle_verify_round_trips_and_rejects_corruption(n):
    data = [fragment_bytes(i + 1, (i, 2 * i)) for i in range(n)]
    tree = merkle_build([digest(g) for g in data])
    for i, g in enumerate(data):
        fp = tree.fingerprint(i)
        assert len(fp) == merkle_depth(n)
        assert merkle_verify(i, g, fp, tree.root)
        flipped = bytearray(g)
        flipped[-1] ^= 0x01
        assert not merkle_verify(i, bytes(flipped), fp, tree.root)
        assert not merkle_verify((i + 1) % n, g, fp, tree.root)


def test_merkle_commitment_proofs():
    universe = Universe(["a", "b", "c", "d", "e"])
    fragments = FragmentVector(universe, [(1,), (2,), None, (4,), (5, 6)])
    scheme = MerkleCommitment()
    root, proofs = scheme.commit(fragments)
    assert len(root) == DIGEST_SIZE
    for node in universe:
        assert scheme.verify(node, fragments[node], root, proofs[node.index - 1], 5)
    assert not scheme.verify(universe.node("a"), (2,), root, proofs[0], 5)
    assert not scheme.verify(universe.node("a"), (1,), root, proofs[1], 5)
    assert scheme.overhead_bytes(5) == 4 * DIGEST_SIZE


# ---------------------------------------------------------------------------
# server state machine

def test_config_requires_complete_code():
    ctx = threshold_quorum_context(4, 1)
    code = mds_code(3, 4, FieldSpec(5), block_labeling(ctx.universe, [1, 1, 1, 1]), ctx.universe)
    with pytest.raises(PreconditionError):
        GavidConfig(ctx, code, ctx.universe.node("p1"))


def test_disperse_init_sends_to_everyone():
    s = scenario()
    state, sends = disperse_init(s.config, s.file)
    assert [m.receiver.name for m in sends] == ["p1", "p2", "p3", "p4"]
    assert all(m.kind is MessageKind.SEND and m.sender.name == "p1" for m in sends)
    assert len(sends[0].commitment) == DIGEST_SIZE * 4
    _, again = disperse_init(s.config, s.file)
    assert again[0].commitment == sends[0].commitment
    with pytest.raises(PreconditionError):
        disperse_init(s.config, s.file + (0,))


def test_send_is_echoed_without_touching_input_state():
    s = scenario()
    config = s.config
    p2 = config.universe.node("p2")
    _, sends = disperse_init(config, s.file)
    state = new_state(p2)
    after, messages, outputs = handle_message(state, config, sends[1])
    assert state == new_state(p2)
    assert after.send_received
    assert [m.kind for m in messages] == [MessageKind.ECHO] * 4
    assert outputs == []
    again, messages, _ = handle_message(after, config, sends[1])
    assert messages == [] and again == after


def test_send_from_non_dealer_is_ignored():
    s = scenario()
    config = s.config
    p2, p3 = config.universe.node("p2"), config.universe.node("p3")
    _, sends = disperse_init(config, s.file)
    forged = ProtocolMessage(MessageKind.SEND, p3, p2, sends[1].commitment, sends[1].fragment)
    state, messages, _ = handle_message(new_state(p2), config, forged)
    assert state == new_state(p2) and messages == []


def test_invalid_echo_leaves_state_unchanged():
    s = scenario()
    config = s.config
    q = config.code.q
    p2, p3 = config.universe.node("p2"), config.universe.node("p3")
    fragments, commitment, _ = commit_file(config, s.file)
    bad = tuple((x + 1) % q for x in fragments[p3])
    state, _, _ = handle_message(new_state(p2), config, disperse_init(config, s.file)[1][1])
    msg = ProtocolMessage(MessageKind.ECHO, p3, p2, commitment, bad)
    after, messages, outputs = handle_message(state, config, msg)
    assert after == state and messages == [] and outputs == []
    good = ProtocolMessage(MessageKind.ECHO, p3, p2, commitment, fragments[p3])
    after, _, _ = handle_message(state, config, good)
    assert after.echoes[commitment] == p3.bit


def test_retrieve_before_store_is_silent():
    s = scenario()
    config = s.config
    p1 = config.universe.node("p1")
    retriever, requests = retrieve_init(new_state(p1), config)
    assert len(requests) == 4 and retriever.output is None
    assert handle_retrieve(new_state(p1), config, requests[0]) is None
    assert requests[0].size_bytes == HEADER_BYTES


# ---------------------------------------------------------------------------
# simulator

def test_honest_dispersal_counts():
    result = run(scenario(retriever="p3"))
    assert result.summary() == "stored: 4/4"
    counts = result.metrics.counts
    assert (counts['send'], counts['echo'], counts['ready']) == (4, 16, 16)
    assert counts['send'] + counts['echo'] + counts['ready'] == 36
    assert counts['retrieve'] == 4 and counts['fragment'] == 4
    assert result.retrieved.value == result.scenario.file
    assert check_execution(result) == []


def test_transcript_lines_are_json():
    result = run(scenario())
    event = json.loads(result.transcript_lines()[0])
    assert set(event) == {'step', 'from', 'to', 'kind', 'D_prefix_8hex', 'dropped'}
    assert event['kind'] == 'send' and event['dropped'] is False
    assert len(event['D_prefix_8hex']) == 8


def test_same_seed_gives_identical_transcript():
    s = scenario(retriever="p2", seed=11)
    assert run(s).transcript_lines() == run(s).transcript_lines()


def test_seeds_change_order_not_outputs():
    s = scenario()
    first, second = run(s.with_seed(1)), run(s.with_seed(2))
    assert honest_kinds(first) == honest_kinds(second) == ['stored'] * 4


def test_crash_dealer_after_two_sends_stores_nothing():
    result = run(scenario(corrupt=["p1"], behaviors={"p1": {"kind": "crash", "crash_after": 2}}))
    assert result.metrics.counts['send'] == 2
    assert result.count(OutputKind.STORED) == 0
    assert check_execution(result) == []


def test_equivocating_dealer_on_four_nodes_stores_nothing():
    result = run(scenario(corrupt=["p1"], behaviors={"p1": "equivocate"}))
    assert result.count(OutputKind.STORED) == 0
    assert len(result.ready_commitments) <= 1


def test_garbage_dealer_makes_every_honest_server_abort():
    result = run(scenario(corrupt=["p1"], behaviors={"p1": "garbage-dealer"}))
    assert honest_kinds(result) == ['abort'] * 3
    assert check_execution(result) == []


def test_retrieval_ignores_garbage_responder():
    result = run(scenario(corrupt=["p2"], behaviors={"p2": "corrupt-fragment"}, retriever="p4"))
    assert result.count(OutputKind.STORED) == 3
    assert result.retrieved is not None
    assert result.retrieved.value == result.scenario.file


def test_broadcast_mode_delivers_the_file():
    result = run(scenario(mode="broadcast"))
    assert result.summary() == "delivered: 4/4"
    assert {out.value for out in result.honest_outputs().values()} == {result.scenario.file}
    assert check_execution(result) == []


@pytest.mark.parametrize("n,f", [(4, 1), (5, 1), (8, 2)])
def test_merkle_variant_storage_accounting(n, f):
    result = run(scenario({"threshold": {"n": n, "f": f}}, variant="merkle"))
    assert result.count(OutputKind.STORED) == n
    for name, stored in result.metrics.stored_bytes.items():
        node = result.scenario.config.universe.node(name)
        fragment = result.states[name].stored_value.fragment
        expected = len(fragment_bytes(node.index, fragment)) + (merkle_depth(n) + 1) * DIGEST_SIZE
        assert stored == expected
    assert check_execution(result) == []


def test_vector_variant_storage_accounting():
    result = run(scenario())
    for name, stored in result.metrics.stored_bytes.items():
        fragment = result.states[name].stored_value.fragment
        index = result.scenario.config.universe.node(name).index
        assert stored == len(fragment_bytes(index, fragment)) + 4 * DIGEST_SIZE


def test_drop_directive_silences_a_corrupt_server():
    result = run(scenario(corrupt=["p4"], script=[{"drop": {"from": "p4"}}]))
    dropped = [e for e in result.transcript if e['dropped']]
    assert dropped and all(e['from'] == 'p4' for e in dropped)
    assert result.count(OutputKind.STORED) == 3
    assert check_execution(result) == []


def test_injected_garbage_echo_is_ignored():
    result = run(scenario(corrupt=["p4"], script=[
        {"inject": {"from": "p4", "to": "p1", "kind": "echo", "fragment": [0, 0, 0]}}]))
    assert result.metrics.injected == 1
    assert result.count(OutputKind.STORED) == 3
    assert check_execution(result) == []


def test_deliver_next_and_delay_directives():
    result = run(scenario(script=[
        {"delay": {"match": {"to": "p2"}, "steps": 10}},
        {"deliver_next": {"to": "p3", "kind": "send"}},
    ]))
    assert (result.transcript[0]['to'], result.transcript[0]['kind']) == ('p3', 'send')
    assert result.summary() == "stored: 4/4"


def test_no_fairness_delivers_only_the_script():
    result = run(scenario(fairness=False, script=[{"deliver_next": {}}]))
    assert result.metrics.steps == 1
    assert not result.quiescent
    assert check_execution(result) == []


def test_step_cap_is_reported_as_liveness_failure():
    result = run(scenario(step_cap=5))
    assert result.capped
    assert any(v.startswith("liveness") for v in check_execution(result))


@pytest.mark.parametrize("overrides", [
    {"script": [{"drop": {"from": "p2"}}]},
    {"script": [{"inject": {"from": "p2", "to": "p1", "kind": "echo"}}]},
    {"script": [{"shuffle": {}}]},
    {"corrupt": ["p2"], "behaviors": {"p3": "mute"}},
    {"corrupt": ["p2"], "behaviors": {"p2": "garbage-dealer"}},
    {"corrupt": ["p2"], "retriever": "p2"},
    {"corrupt": ["p1", "p2"]},
    {"file": {"symbols": [0] * 10}},
    {"file": {"symbols": [99]}},
])
def test_scenario_errors(overrides):
    with pytest.raises(ScenarioError):
        scenario(**overrides)


def test_corrupt_set_must_fit_a_fail_prone_set():
    scenario(FIVE_NODE, corrupt=["p1", "p2"])
    with pytest.raises(ScenarioError):
        scenario(FIVE_NODE, corrupt=["p1", "p3"])


def test_behaviors():
    assert forge_commitment(b'\x00\x0f') == b'\xff\xf0'
    crash = Behavior('crash', crash_after=1)
    assert crash.alive
    crash.sent = 1
    assert not crash.alive
    assert not Behavior('mute').alive
    with pytest.raises(ScenarioError):
        Behavior('bogus')


@pytest.mark.parametrize("quorum", [THRESHOLD_4, FIVE_NODE], ids=["threshold-4-1", "five-node"])
@pytest.mark.parametrize("name,overrides,honest_dealer", ADVERSARIES, ids=[a[0] for a in ADVERSARIES])
def test_sweep_has_no_violations(quorum, name, overrides, honest_dealer):
    template = scenario(quorum, retriever="p3", **overrides)
    report = sweep(template, range(SWEEP_SEEDS))
    assert report.runs == SWEEP_SEEDS
    assert report.ok, report.lines()
    if honest_dealer:
        assert report.terminated == SWEEP_SEEDS


def test_equivocating_dealer_retrieval_returns_the_committed_file():
    retrieved = 0
    for seed in range(20):
        result = run(scenario(FIVE_NODE, corrupt=["p1"], behaviors={"p1": "equivocate"},
                              retriever="p3", seed=seed))
        assert check_execution(result) == []
        if result.retrieved is not None:
            retrieved += 1
            assert result.retrieved.value == committed_value(result)
    assert retrieved > 0


def test_forged_retrieval_under_corrupt_dealer_is_flagged():
    result = run(scenario(FIVE_NODE, corrupt=["p1"], retriever="p3"))
    assert result.retrieved is not None
    q = result.scenario.config.code.q
    forged = tuple((v + 1) % q for v in result.retrieved.value)
    result.retrieved = dataclasses.replace(result.retrieved, value=forged)
    violations = check_execution(result)
    assert "correctness: retrieved value differs from the committed file" in violations
    assert "correctness: retrieved value does not re-encode to its commitment" in violations


@pytest.mark.parametrize("quorum", [THRESHOLD_4, FIVE_NODE], ids=["threshold-4-1", "five-node"])
def test_sweep_checks_correctness_under_corrupt_dealer(quorum):
    template = scenario(quorum, corrupt=["p1"], retriever="p3")
    report = sweep(template, range(SWEEP_SEEDS))
    assert report.ok, report.lines()
    assert report.terminated == SWEEP_SEEDS
    result = run(template.with_seed(0))
    assert committed_value(result) == result.retrieved.value == result.scenario.file


def test_broadcast_sweep_under_equivocation():
    template = scenario(FIVE_NODE, mode="broadcast", corrupt=["p1"], behaviors={"p1": "equivocate"})
    report = sweep(template, range(20))
    assert report.ok, report.lines()


def test_random_files_round_trip_through_retrieval():
    rng = random.Random(5)
    for _ in range(5):
        symbols = [rng.randrange(5) for _ in range(2)]
        result = run(scenario(file={"symbols": symbols}, retriever="p2", seed=rng.randrange(1000)))
        assert result.retrieved.value == tuple(symbols)
