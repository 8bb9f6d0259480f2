import random

import pytest

from errors import ModelError
from fixtures import fixture_names, fixture_path, fixtures
from guards import TRUE, And, Const, Eq, LinkAction, LinkOp, LinkRule, Neq, Not, Var
from model_format import (
    document_from_mcn,
    document_from_net,
    load_model,
    parse_guard,
    parse_model,
    serialize_model,
)
from net import Multiset, Place, PlaceClass, TransClass, Transition, make_net

HEADER = "universe\n  const a b\n  var x\n"


def _diagnostics(text):
    result = parse_model(text)
    assert not result.ok
    assert result.document is None
    return result.diagnostics


def _random_net(rng):
    """A small net whose every name is declared, with guards, link rules, virtual arcs and γ0."""
    consts = [f"c{i}" for i in range(rng.randint(1, 3))]
    places = [Place(f"P{i}", rng.randint(1, 2), rng.choice(list(PlaceClass))) for i in range(rng.randint(1, 4))]
    terms = ["x", *consts]
    transitions, arcs = [], {}
    for j in range(rng.randint(1, 3)):
        name = f"t{j}"
        pre, post = rng.choice(places), rng.choice(places)
        arcs[(pre.name, name)] = [tuple(rng.choice(terms) for _ in range(pre.arity))]
        arcs[(name, post.name)] = [tuple(rng.choice(terms) for _ in range(post.arity))]
        guard, rule = TRUE, LinkRule()
        if rng.random() < 0.5:
            arcs[("S", name)] = [(rng.choice(consts),)]
            arcs[(name, "S")] = [(rng.choice(consts),)]
            guard = Eq(Var("x"), Const(rng.choice(consts)))
            rule = LinkRule(actions=(LinkAction("S", rng.choice(list(LinkOp))),))
        transitions.append(Transition(name, guard, rule, rng.choice(list(TransClass))))
    m0 = {
        p.name: [tuple(rng.choice(consts) for _ in range(p.arity)) for _ in range(rng.randint(1, 3))]
        for p in places if rng.random() < 0.6
    }
    gamma0 = {"S": [rng.choice(places).name]} if rng.random() < 0.5 else None
    return make_net(
        places, transitions, [(s, t, e) for (s, t), e in arcs.items()],
        variables=["x", "S"], gamma0=gamma0, m0=m0,
        interfaces=["I0"] if rng.random() < 0.3 else (),
    )


class TestFixtures:
    def test_bundled_models(self):
        names = fixture_names()
        assert {"e1", "e2"} <= set(names)
        assert any(n.startswith("mutant_") for n in names)
        bundle = fixtures()
        assert set(bundle) == {"e1", "e2", "mutants"}
        assert set(bundle["mutants"]) == {n for n in names if n.startswith("mutant_")}

    def test_unknown_fixture(self):
        with pytest.raises(ValueError, match="Unknown fixture"):
            fixture_path("e9")

    def test_e1_contents(self, e1_doc):
        net = e1_doc.net
        assert net.interfaces == {"S1", "S2", "S3"}
        assert net.m0["Loc"] == Multiset.of(("L_A",), ("L_B",))
        assert net.places["S1"].klass is PlaceClass.INTERFACE
        assert [c.name for c in e1_doc.components] == ["CN1", "CN2", "CN3", "ISN"]
        assert e1_doc.finals == {"CN1": ("Fin1",), "CN2": ("Fin2",), "CN3": ("Fin3",)}
        assert e1_doc.final_mode == "simultaneous"

    def test_e2_contents(self, e2_doc):
        net = e2_doc.net
        assert net.transitions["t_order"].guard == And(
            Eq(Var("I"), Const("placeorder_C_M")), Eq(Var("F"), Const("f1")),
        )
        (action,) = net.transitions["t_discon"].rule.actions
        assert (action.variable, action.op) == ("I", LinkOp.REMOVE)
        assert len(net.interfaces) == 10
        assert e2_doc.final_mode == "independent"
        assert e2_doc.finals["CLI"] == ("Fin1", "Fin4")


class TestRoundTrip:
    @pytest.mark.parametrize("name", ["e1", "e2", "mutant_double_send"])
    def test_fixture_survives_serialization(self, name):
        doc = load_model(fixture_path(name))
        again = parse_model(serialize_model(doc))
        assert again.ok, again.diagnostics
        assert again.document == doc

    @pytest.mark.parametrize("seed", range(40))
    def test_random_net_survives_serialization(self, seed):
        net = _random_net(random.Random(seed))
        again = parse_model(serialize_model(document_from_net(net)))
        assert again.ok, again.diagnostics
        assert again.document.net == net

    def test_net_without_components(self, send_receive_net):
        doc = document_from_net(send_receive_net, {"main": ["Done"]}, "independent")
        again = parse_model(serialize_model(doc)).document
        assert again == doc
        assert again.to_mcn().final_places == {"Done"}

    def test_document_from_composed_net(self, e1_mcn):
        doc = document_from_mcn(e1_mcn)
        again = parse_model(serialize_model(doc)).document
        assert again.net == e1_mcn.net
        assert again.to_mcn().net == e1_mcn.net


class TestDiagnostics:
    def test_arity_mismatch_in_marking(self):
        (d,) = _diagnostics(HEADER + "places\n  P 2 process\nmarking\n  P : <a>\n")
        assert d.line == 7
        assert "arity mismatch" in d.message

    def test_arity_mismatch_on_arc(self):
        text = HEADER + "places\n  P 2 process\ntransitions\n  t process\narcs\n  P -> t : <a>\n"
        (d,) = _diagnostics(text)
        assert d.line == 9
        assert "arity mismatch" in d.message

    def test_syntax_error_position(self):
        (d,) = _diagnostics("places\n  P one process\n")
        assert (d.line, d.column) == (2, 5)
        assert d.message.startswith("syntax error: unexpected 'one'")

    def test_unexpected_character(self):
        (d,) = _diagnostics("places\n  P 1 process $\n")
        assert (d.line, d.column) == (2, 15)
        assert "'$'" in d.message

    @pytest.mark.parametrize("body, fragment", [
        ("places\n  P 1 process\nmarking\n  P : <zz>\n", "'zz'"),
        ("places\n  P 1 process\nmarking\n  Q : <a>\n", "undeclared place"),
        ("places\n  P 1 nowhere\n", "unknown place class"),
        ("transitions\n  t sideways\n", "unknown transition class"),
        ("transitions\n  t process\n    rho if true then +a\n", "non-variable"),
        ("transitions\n  t process\narcs\n  t -> Q : <a>\n", "'Q'"),
        ("places\n  P 1 process\narcs\n  P -> P : <a>\n", "must connect"),
        ("gamma\n  a : b\n", "non-variable"),
        ("interfaces\n  zz\n", "interface 'zz'"),
        ("places\n  P 1 process\nfinals\n  mode sometimes\n", "final mode"),
        ("places\n  P 1 initial_final\ntransitions\n  t process\n"
         "components\n  component C places P transitions\nfinals\n  D : P\n", "unknown component"),
        ("places\n  P 1 initial_final\ntransitions\n  t process\n"
         "components\n  component C places P transitions\n", "not assigned"),
        ("places\n  x 1 process\n", "declared as a variable"),
        ("places\n  P 1 process\ntransitions\n  P process\n", "both a place and a transition"),
    ])
    def test_semantic_errors(self, body, fragment):
        diags = _diagnostics(HEADER + body)
        assert any(fragment in d.message for d in diags), [str(d) for d in diags]
        assert all(d.line >= 1 for d in diags)

    @pytest.mark.parametrize("body", [
        "interfaces\n  zz\n",
        "gamma\n  zz : a\n",
        "places\n  P 1 process\nmarking\n  P : <zz>\n",
        "places\n  P 1 process\narcs\n  P -> zz : <a>\n",
    ])
    def test_messages_quote_the_bare_name(self, body):
        (d,) = _diagnostics(HEADER + body)
        assert "'zz'" in d.message
        assert "Token(" not in d.message

    def test_diagnostics_are_sorted(self):
        diags = _diagnostics(HEADER + "places\n  P 1 process\nmarking\n  P : <zz>\n  Q : <a>\n")
        assert [d.line for d in diags] == sorted(d.line for d in diags)
        assert len(diags) == 2

    def test_load_model_raises_with_source(self, tmp_path):
        bad = tmp_path / "bad.vpn"
        bad.write_text("places\n  P one process\n")
        with pytest.raises(ModelError) as exc:
            load_model(bad)
        assert exc.value.diagnostics[0].source == str(bad)
        assert str(bad) in str(exc.value)

    def test_comments_and_blank_lines(self):
        text = "# header\n\nplaces\n\n  P 1 process   # trailing\n# end\n"
        result = parse_model(text)
        assert result.ok, result.diagnostics
        assert set(result.document.net.places) == {"P"}


class TestGuardParsing:
    def test_precedence(self):
        g = parse_guard("not x = a and y != b or x = y", variables={"x", "y"})
        assert g.evaluate({"x": "c", "y": "c"})
        assert g == parse_guard(str(g), variables={"x", "y"})
        assert isinstance(g.left, And) and isinstance(g.left.left, Not)

    def test_unknown_names_are_constants_without_a_universe(self):
        assert parse_guard("x = k", variables={"x"}) == Eq(Var("x"), Const("k"))

    def test_strict_with_constants(self):
        assert parse_guard("x != k", {"x"}, {"k"}) == Neq(Var("x"), Const("k"))
        with pytest.raises(ModelError, match="unresolved"):
            parse_guard("x = q", {"x"}, {"k"})

    def test_syntax_error(self):
        with pytest.raises(ModelError):
            parse_guard("x = = a", {"x"})


class TestFuzz:
    """Arbitrary edits of a valid file always give a document or diagnostics."""

    @pytest.mark.parametrize("name", fixture_names())
    @pytest.mark.parametrize("seed", range(60))
    def test_parse_is_total(self, name, seed):
        rng = random.Random(seed)
        text = fixture_path(name).read_text()
        for _ in range(rng.randint(1, 4)):
            i = rng.randrange(len(text))
            op = rng.choice(["delete", "insert", "swap"])
            if op == "delete":
                text = text[:i] + text[i + rng.randint(1, 12):]
            elif op == "insert":
                text = text[:i] + rng.choice(["<", ">", ":", "->", "\n", "{", "x", "9", " ", "$", "é"]) + text[i:]
            else:
                lines = text.split("\n")
                a, b = rng.randrange(len(lines)), rng.randrange(len(lines))
                lines[a], lines[b] = lines[b], lines[a]
                text = "\n".join(lines)
        result = parse_model(text)
        assert (result.document is None) == bool(result.diagnostics)
        for d in result.diagnostics:
            assert isinstance(d.line, int) and isinstance(d.column, int)
            assert d.message
