import itertools
import random
from collections import Counter

import pytest

from errors import InvalidTrace, NotEnabled, UnknownTransition
from firing import (
    bound_inputs,
    bound_outputs,
    check_data_sync,
    enabled_bindings,
    fire,
    is_enabled,
    replay,
    successors,
)
from guards import TRUE, Const, Eq, LinkAction, LinkOp, LinkRule, Neq, Var
from net import Binding, Configuration, Multiset, Transition, make_net


def _step_e1(net, cfg, t, **binding):
    return fire(net, t, Binding(binding), cfg)


class TestE1Firing:
    def test_only_enter_is_enabled_initially(self, e1_doc):
        net = e1_doc.net
        cfg = Configuration.initial(net)
        fired = [(t, b) for t, b, _ in successors(net, cfg)]
        assert fired == [("enter", Binding({"L": "L_A"})), ("enter", Binding({"L": "L_B"}))]

    def test_receiver_waits_for_the_link(self, e1_doc):
        net = e1_doc.net
        cfg = Configuration.initial(net)
        assert enabled_bindings(net, "rec_1", cfg) == []

    def test_connect_creates_link_and_message(self, e1_doc):
        net = e1_doc.net
        cfg = _step_e1(net, Configuration.initial(net), "enter", L="L_A")
        assert cfg.tokens("L_A") == Multiset.of(("eps",))
        (b,) = enabled_bindings(net, "con_1", cfg)
        assert b == Binding({"L": "L_A", "S": "S1", "F": "F1"})
        cfg = fire(net, "con_1", b, cfg)
        assert cfg.gamma_of("S") == {"S1"}
        assert cfg.tokens("S1") == Multiset.of(("L_A", "S1", "F1", "none", "req"))

    def test_receive_binds_data_from_the_message(self, e1_doc):
        net = e1_doc.net
        cfg = _step_e1(net, Configuration.initial(net), "enter", L="L_B")
        cfg = _step_e1(net, cfg, "con_1", L="L_B", S="S1", F="F1")
        (b,) = enabled_bindings(net, "rec_1", cfg)
        assert b == Binding({"L": "L_B", "S": "S1", "F": "F1", "D": "D12"})

    def test_move_removes_the_link(self, e1_doc):
        net = e1_doc.net
        path = [
            ("enter", {"L": "L_A"}),
            ("con_1", {"L": "L_A", "S": "S1", "F": "F1"}),
            ("rec_1", {"L": "L_A", "S": "S1", "F": "F1", "D": "D11"}),
            ("res_1", {"L": "L_A", "S": "S1", "F": "F1", "D": "D11"}),
            ("rec_3", {"L": "L_A", "S": "S1", "F": "F1", "D": "D11"}),
            ("con_2", {"L": "L_A", "S": "S2", "F": "F2"}),
        ]
        cfg = replay(net, path)
        assert cfg.gamma_of("S") == {"S1", "S2"}
        cfg = replay(net, [
            ("rec_2", {"L": "L_A", "S": "S2", "F": "F2", "D": "D2"}),
            ("res_2", {"L": "L_A", "S": "S2", "F": "F2", "D": "D2"}),
            ("rec_4", {"L": "L_A", "S": "S2", "F": "F2", "D": "D2"}),
            ("mov", {"S": "S2"}),
        ], start=cfg)
        assert cfg.gamma_of("S") == {"S1"}
        assert cfg.tokens("Fin1")


class TestEnabledness:
    def test_unknown_transition(self, send_receive_net):
        cfg = Configuration.initial(send_receive_net)
        with pytest.raises(UnknownTransition):
            is_enabled(send_receive_net, "nope", {}, cfg)
        with pytest.raises(UnknownTransition):
            enabled_bindings(send_receive_net, "nope", cfg)

    def test_partial_binding_is_not_enabled(self, send_receive_net):
        cfg = Configuration.initial(send_receive_net)
        assert not is_enabled(send_receive_net, "send", {}, cfg)
        assert is_enabled(send_receive_net, "send", {"S": "Box"}, cfg)

    def test_virtual_output_cannot_target_a_transition(self, send_receive_net):
        cfg = Configuration.initial(send_receive_net)
        assert not is_enabled(send_receive_net, "send", {"S": "recv"}, cfg)

    def test_virtual_output_to_existing_place_needs_matching_arity(self):
        net = make_net(
            places=[("Go", 1), ("Wide", 2)],
            transitions=["t"],
            arcs=[("Go", "t", [("S",)]), ("t", "S", [("m",)])],
            variables=["S"],
            m0={"Go": [("Wide",)]},
        )
        assert enabled_bindings(net, "t", Configuration.initial(net)) == []

    def test_new_place_is_created_with_the_expression_arity(self):
        net = make_net(
            places=[("Go", 1)],
            transitions=["t"],
            arcs=[("Go", "t", [("S",)]), ("t", "S", [("m", "n")])],
            variables=["S"],
            m0={"Go": [("Fresh",)]},
        )
        cfg = fire(net, "t", {"S": "Fresh"}, Configuration.initial(net))
        assert cfg.arity("Fresh") == 2
        assert cfg.tokens("Fresh") == Multiset.of(("m", "n"))

    def test_empty_virtual_output_needs_an_existing_place(self):
        net = make_net(
            places=[("Go", 1)],
            transitions=["t"],
            arcs=[("Go", "t", [("S",)]), ("t", "S", [])],
            variables=["S"],
            m0={"Go": [("Nowhere",), ("Go",)]},
        )
        assert enabled_bindings(net, "t", Configuration.initial(net)) == [Binding({"S": "Go"})]

    def test_demand_is_summed_over_solid_and_virtual_arcs(self):
        net = make_net(
            places=[("P", 1), ("Out", 1)],
            transitions=["t"],
            arcs=[
                ("P", "t", [("a",)]),
                ("S", "t", [("a",)]),
                ("t", "Out", [("a",)]),
            ],
            variables=["S"],
            gamma0={"S": ["P"]},
            m0={"P": [("a",)]},
        )
        cfg = Configuration.initial(net)
        assert not is_enabled(net, "t", {"S": "P"}, cfg)
        richer = Configuration.build({"P": Multiset({("a",): 2})}, cfg.place_map, cfg.gamma_map)
        assert is_enabled(net, "t", {"S": "P"}, richer)
        assert fire(net, "t", {"S": "P"}, richer).tokens("P") == Multiset()

    def test_link_removal_of_an_absent_link_is_a_noop(self):
        rule = LinkRule(actions=(LinkAction("S", LinkOp.REMOVE),))
        net = make_net(
            places=[("Go", 1), ("Box", 1)],
            transitions=[Transition("t", rule=rule)],
            arcs=[("Go", "t", [("S",)]), ("t", "S", [("m",)])],
            variables=["S"],
            gamma0={"S": ["Go"]},
            m0={"Go": [("Box",)]},
        )
        cfg = fire(net, "t", {"S": "Box"}, Configuration.initial(net))
        assert cfg.gamma_of("S") == {"Go"}


class TestFireAndReplay:
    def test_fire_rejects_disabled_step(self, send_receive_net):
        cfg = Configuration.initial(send_receive_net)
        with pytest.raises(NotEnabled) as exc:
            fire(send_receive_net, "recv", {}, cfg)
        assert exc.value.transition == "recv"

    def test_replay_accepts_report_style_steps(self, send_receive_net):
        cfg = replay(send_receive_net, [
            {"transition": "send", "binding": {"S": "Box"}},
            {"transition": "recv", "binding": {}},
        ])
        assert cfg.tokens("Done") == Multiset.of(("eps",))

    def test_check_data_sync_rejects_conflicting_pairs(self, send_receive_net):
        with pytest.raises(InvalidTrace, match="step 0"):
            check_data_sync(send_receive_net, [("send", [("S", "Box"), ("S", "Go")])])

    def test_check_data_sync_rejects_unknown_transition(self, send_receive_net):
        with pytest.raises(InvalidTrace, match="unknown transition"):
            check_data_sync(send_receive_net, [("teleport", {})])

    def test_check_data_sync_rejects_disabled_step(self, send_receive_net):
        with pytest.raises(InvalidTrace, match="step 1"):
            check_data_sync(send_receive_net, [("send", {"S": "Box"}), ("send", {"S": "Box"})])

    def test_check_data_sync_accepts_a_valid_trace(self, send_receive_net):
        assert check_data_sync(send_receive_net, [("send", [("S", "Box")]), ("recv", [])])


# ────────────────────────────────────────────────────────────
#  Oracles
# ────────────────────────────────────────────────────────────

def _classical_net(rng: random.Random):
    places = [f"P{i}" for i in range(rng.randint(2, 5))]
    transitions = [f"t{i}" for i in range(rng.randint(1, 4))]
    pre, post, arcs = {}, {}, []
    for t in transitions:
        pre[t] = Counter({p: rng.randint(1, 2) for p in rng.sample(places, rng.randint(1, 2))})
        post[t] = Counter({p: rng.randint(1, 2) for p in rng.sample(places, rng.randint(0, 2))})
        arcs += [(p, t, [("eps",)] * n) for p, n in pre[t].items()]
        arcs += [(t, p, [("eps",)] * n) for p, n in post[t].items()]
    m0 = {p: [("eps",)] * rng.randint(0, 3) for p in places}
    net = make_net(places=[(p, 1) for p in places], transitions=transitions, arcs=arcs, m0=m0)
    return net, pre, post


def _as_counts(cfg, places):
    return {p: cfg.tokens(p).count(("eps",)) for p in places}


class TestClassicalOracle:
    """Nets without variables must behave exactly like place/transition nets."""

    @pytest.mark.parametrize("seed", range(100))
    def test_successors_match_the_place_transition_rule(self, seed):
        rng = random.Random(seed)
        net, pre, post = _classical_net(rng)
        places = sorted(net.places)
        cfg = Configuration.initial(net)
        for _ in range(6):
            marking = _as_counts(cfg, places)
            expected = {}
            for t in sorted(net.transitions):
                if all(marking[p] >= n for p, n in pre[t].items()):
                    nxt = dict(marking)
                    for p, n in pre[t].items():
                        nxt[p] -= n
                    for p, n in post[t].items():
                        nxt[p] += n
                    expected[t] = nxt
            got = {t: _as_counts(c, places) for t, b, c in successors(net, cfg)}
            assert got == expected
            if not expected:
                break
            t = rng.choice(sorted(expected))
            cfg = fire(net, t, {}, cfg)


_CONSTS = ["a", "b", "c"]
_VARS = ["x", "y"]


def _colored_net(rng: random.Random):
    """Random colored net with a virtual place S linked by γ0 to some of the places (and possibly a non-place)."""
    arity = {f"P{i}": rng.randint(1, 2) for i in range(4)}
    transitions, arcs = [], []
    for i in range(3):
        t = f"t{i}"
        bound: set[str] = set()
        for p in rng.sample(sorted(arity), rng.randint(1, 2)):
            tup = tuple(rng.choice(_VARS + _CONSTS) for _ in range(arity[p]))
            bound |= {x for x in tup if x in _VARS}
            arcs.append((p, t, [tup]))
        if rng.random() < 0.5:
            tup = tuple(rng.choice(_VARS + _CONSTS) for _ in range(rng.randint(1, 2)))
            bound |= {x for x in tup if x in _VARS}
            arcs.append(("S", t, [tup]))
        pool = sorted(bound) + _CONSTS
        p = rng.choice(sorted(arity))
        arcs.append((t, p, [tuple(rng.choice(pool) for _ in range(arity[p]))]))
        if rng.random() < 0.3:
            arcs.append((t, "S", [tuple(rng.choice(pool) for _ in range(rng.randint(1, 2)))]))
        guard = TRUE
        if len(bound) == 2 and rng.random() < 0.5:
            guard = rng.choice([Eq, Neq])(Var("x"), Var("y"))
        elif bound and rng.random() < 0.5:
            guard = rng.choice([Eq, Neq])(Var(sorted(bound)[0]), Const(rng.choice(_CONSTS)))
        transitions.append(Transition(t, guard=guard))
    m0 = {
        p: [tuple(rng.choice(_CONSTS) for _ in range(n)) for _ in range(rng.randint(0, 3))]
        for p, n in arity.items()
    }
    linked = rng.sample(sorted(arity), rng.randint(1, 3)) + (["a"] if rng.random() < 0.3 else [])
    return make_net(
        places=list(arity.items()), transitions=transitions, arcs=arcs,
        variables=_VARS + ["S"], constants=_CONSTS, m0=m0, gamma0={"S": linked},
    )


def _brute_force_enabled(net, t, cfg):
    """Every binding over the constants that passes the guard and every enabling clause."""
    wanted = sorted(net.variables_of(t))
    found = []
    for values in itertools.product(sorted(net.constants), repeat=len(wanted)):
        b = dict(zip(wanted, values))
        if not net.transitions[t].guard.evaluate(b):
            continue
        ok = True
        demand = Counter()
        for arc in net.input_arcs(t):
            place = arc.source
            if place in net.variables:
                place = b[place]
                linked = place in cfg.gamma_of(arc.source) and cfg.has_place(place)
                ok = ok and linked and all(len(tok) == cfg.arity(place) for tok in arc.expr.elements())
            for tok, n in arc.expr.items():
                # several arcs that resolve to one place add up their demand
                demand[(place, tuple(b.get(x, x) for x in tok))] += n
        for arc in net.output_arcs(t):
            if arc.target not in net.variables:
                continue
            place = b[arc.target]
            lengths = {len(tok) for tok in arc.expr.elements()}
            if place in net.transitions:
                ok = False
            elif cfg.has_place(place):
                ok = ok and lengths <= {cfg.arity(place)}
            else:
                ok = ok and len(lengths) == 1
        if ok and all(cfg.tokens(p).count(tok) >= n for (p, tok), n in demand.items()):
            found.append(Binding(b))
    return sorted(found)


class TestBindingOracle:
    """Pattern-driven binding search agrees with exhaustive enumeration."""

    @pytest.mark.parametrize("seed", range(60))
    def test_enabled_bindings_match_brute_force(self, seed):
        rng = random.Random(1000 + seed)
        net = _colored_net(rng)
        cfg = Configuration.initial(net)
        for _ in range(4):
            for t in sorted(net.transitions):
                assert enabled_bindings(net, t, cfg) == _brute_force_enabled(net, t, cfg)
            succ = successors(net, cfg)
            if not succ:
                break
            cfg = rng.choice(succ)[2]


def _linking_net(rng: random.Random):
    """Random arity-1 net plus a gadget that creates, uses and drops links through S."""
    places = [f"P{i}" for i in range(3)]
    arcs = []
    transitions = []
    for i in range(3):
        t = f"t{i}"
        src, dst = rng.choice(places), rng.choice(places)
        arcs += [(src, t, [("x",)]), (t, dst, [(rng.choice(["x", "a", "b"]),)])]
        transitions.append(Transition(t))
    op = rng.choice([LinkOp.ADD, LinkOp.REMOVE])
    transitions += [
        Transition("link", rule=LinkRule(actions=(LinkAction("S", op),))),
        Transition("use"),
        Transition("drop", rule=LinkRule(actions=(LinkAction("S", LinkOp.REMOVE),))),
    ]
    arcs += [
        ("Dir", "link", [("S",)]), ("link", "S", [("a",)]), ("link", "Dir", [("S",)]),
        ("S", "use", [("a",)]), ("use", "P0", [("a",)]),
        ("Dir", "drop", [("S",)]), ("drop", "S", []),
    ]
    m0 = {p: [(rng.choice(["a", "b"]),) for _ in range(rng.randint(0, 2))] for p in places}
    m0["Dir"] = [("P1",), ("Fresh",)]
    return make_net(
        places=[(p, 1) for p in places] + [("Dir", 1)],
        transitions=transitions, arcs=arcs,
        variables=["x", "S"], constants=["a", "b"],
        gamma0={"S": ["P2"]}, m0=m0,
    )


class TestFiringInvariants:
    """At least 10,000 random firings, each checked against the firing rule."""

    def test_firing_is_pure_and_deterministic(self, e1_doc):
        net = e1_doc.net
        cfg = Configuration.initial(net)
        for _ in range(6):
            succ = successors(net, cfg)
            if not succ:
                break
            t, b, expected = succ[-1]
            before = cfg.to_dict()
            first, second = fire(net, t, b, cfg), fire(net, t, b, cfg)
            assert first == second == expected
            assert first.digest() == second.digest()
            assert cfg.to_dict() == before
            assert Configuration.from_dict(before) == cfg
            cfg = first

    @pytest.mark.slow
    @pytest.mark.parametrize("seed", range(100))
    def test_random_walks(self, seed):
        rng = random.Random(5000 + seed)
        net = _linking_net(rng)
        cfg = Configuration.initial(net)
        fired = 0
        while fired < 100:
            succ = successors(net, cfg)
            if not succ:
                cfg = Configuration.initial(net)
                succ = successors(net, cfg)
                if not succ:
                    break
            t, b, nxt = rng.choice(succ)
            self._check_step(net, cfg, t, b, nxt)
            cfg = nxt
            fired += 1

    @staticmethod
    def _check_step(net, cfg, t, b, nxt):
        before = cfg.to_dict()
        assert fire(net, t, b, cfg) == nxt
        assert cfg.to_dict() == before
        assert set(cfg.place_map) <= set(nxt.place_map)
        for p, n in cfg.place_map.items():
            assert nxt.arity(p) == n
        demand, supply = bound_inputs(net, t, b), bound_outputs(net, t, b)
        for p in set(nxt.place_map):
            expected = cfg.tokens(p)
            if p in demand:
                assert expected.covers(demand[p])
                expected = expected - demand[p]
            if p in supply:
                expected = expected + supply[p]
            assert nxt.tokens(p) == expected
        rule = net.transitions[t].rule
        if rule.is_noop:
            assert nxt.gamma == cfg.gamma
        else:
            (action,) = rule.actions
            target = b[action.variable]
            if action.op is LinkOp.ADD:
                assert nxt.gamma_of("S") == cfg.gamma_of("S") | {target}
            else:
                assert nxt.gamma_of("S") == cfg.gamma_of("S") - {target}
