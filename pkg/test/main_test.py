import json

import pytest

import parallel_rewrite.__main__ as cli
from parallel_rewrite.__main__ import main
from parallel_rewrite.terms import UnboundVariable

from conftest import SAMPLES


EXAMPLE = str(SAMPLES / 'example.grw')
CONFLICT = str(SAMPLES / 'conflict.grw')
TRIANGLE = str(SAMPLES / 'triangle.grw')
AUTOMORPHISMS = str(SAMPLES / 'automorphisms.grw')


def test_parse_prints_canonical_text(capsys):
    assert main(['parse', EXAMPLE]) == 0
    out = capsys.readouterr().out
    assert out.startswith("signature {\n    sort T;\n    const a: T;\n    const b: T;\n    fn s(T): T;\n}\n\n")
    assert "graph G {\n    node 1 {b};\n" in out
    assert "rule r1 {\n    vars u, v;\n" in out


def test_parse_json(capsys):
    assert main(['parse', EXAMPLE, '--json']) == 0
    data = json.loads(capsys.readouterr().out)
    assert data['signature']['sorts'] == ['T']
    assert data['signature']['symbols']['s'] == {'args': ['T'], 'result': 'T'}
    assert list(data['graphs']) == ['G']
    assert data['rules'][0]['vars'] == ['u', 'v']


def test_match(capsys):
    assert main(['match', EXAMPLE, '--graph', 'G']) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines == [
        "r1{⟨x,1⟩, ⟨y,2⟩, ⟨z,3⟩, ⟨f,4⟩, ⟨g,5⟩, ⟨u,b⟩, ⟨v,a⟩}",
        "r1{⟨x,1⟩, ⟨y,3⟩, ⟨z,2⟩, ⟨f,5⟩, ⟨g,4⟩, ⟨u,b⟩, ⟨v,s(b)⟩}",
    ]


def test_match_json(capsys):
    assert main(['match', EXAMPLE, '--graph', 'G', '--rule', 'r1', '--json']) == 0
    data = json.loads(capsys.readouterr().out)
    assert len(data) == 2
    assert data[0]['substitution'] == {'u': 'b', 'v': 'a'}
    assert data[1]['vertices'] == {'x': '1', 'y': '3', 'z': '2'}


def test_match_classes(capsys):
    assert main(['match', TRIANGLE, '--graph', 'T', '--classes']) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 1
    assert lines[0].startswith("[6] triangle{")


def test_step_min_and_max_differ_on_conflict(capsys):
    assert main(['step', CONFLICT, '--graph', 'G', '--mode', 'min']) == 0
    minimal = capsys.readouterr().out
    assert main(['step', CONFLICT, '--graph', 'G', '--mode', 'max']) == 0
    maximal = capsys.readouterr().out
    assert "node 1 {a, b};" in minimal
    assert "node 2" not in minimal
    assert "node 2 {s(a)};" in maximal
    assert "edge 5: 1 -> 3 {};" in maximal


def test_step_normalize_fresh(capsys):
    assert main(['step', CONFLICT, '--graph', 'G', '--normalize-fresh']) == 0
    out = capsys.readouterr().out
    assert 'node "@3" {a};' in out
    assert 'node "@4" {a};' in out
    assert "z'" not in out


def test_step_modulo_aut(capsys):
    assert main(['step', TRIANGLE, '--graph', 'T', '--modulo-aut', '--json']) == 0
    data = json.loads(capsys.readouterr().out)
    assert len(data['nodes']) == 4
    assert len(data['edges']) == 12


@pytest.mark.parametrize('extra', [[], ['--normalize-fresh']])
def test_two_steps_modulo_aut(capsys, extra):
    assert main(['step', TRIANGLE, '--graph', 'T', '--modulo-aut', '--steps', '2', '--json'] + extra) == 0
    data = json.loads(capsys.readouterr().out)
    assert len(data['nodes']) == 8
    assert len(data['edges']) == 36


def test_check_regular(capsys):
    assert main(['check-regular', TRIANGLE, '--graph', 'T']) == 0
    assert capsys.readouterr().out == "regular (6 matchings)\n"

    assert main(['check-regular', CONFLICT, '--graph', 'G']) == 1
    out = capsys.readouterr().out
    assert out.startswith("not regular\n")
    assert "does not preserve" in out


def test_check_regular_json(capsys):
    assert main(['check-regular', CONFLICT, '--graph', 'G', '--json']) == 1
    data = json.loads(capsys.readouterr().out)
    assert data['matchings'] == 2
    assert data['regular'] is False
    assert len(data['conflict']) == 2


@pytest.mark.parametrize(
    ['args', 'order'],
    [
        (['--graph', 'H_par'], 2),
        (['--graph', 'G_par'], 2),
    ]
)
def test_aut_of_graph(capsys, args, order):
    assert main(['aut', AUTOMORPHISMS] + args) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == f"order {order}"
    assert len(lines) == order + 1


def test_aut_of_rule(capsys):
    assert main(['aut', TRIANGLE, '--rule', 'triangle', '--json']) == 0
    data = json.loads(capsys.readouterr().out)
    assert data['order'] == 6
    assert len(data['elements']) == 6


def test_group_too_large():
    assert main(['--max-group-order', '2', 'aut', TRIANGLE, '--rule', 'triangle']) == 1


def test_iso(capsys):
    assert main(['iso', AUTOMORPHISMS, '--graph', 'H_par', '--other', 'H_par']) == 0
    assert main(['iso', AUTOMORPHISMS, '--graph', 'H_par', '--other', 'G_par']) == 1
    assert capsys.readouterr().out.endswith("not isomorphic\n")


def test_life(capsys):
    assert main(['life', '--pattern', 'blinker', '--steps', '2', '--verify']) == 0
    out = capsys.readouterr().out
    assert "step 1:\n.....\n.....\n.###.\n.....\n.....\n" in out
    assert "step 2:" in out


def test_life_json(capsys):
    assert main(['life', '--cells', '1,1;1,2;2,1;2,2', '--mode', 'auto-min', '--verify', '--json']) == 0
    data = json.loads(capsys.readouterr().out)
    assert data['frames'][0] == data['frames'][1]
    assert data['steps'] == [{'step': 1, 'matchings': 0, 'applied': 0, 'oracle': True, 'regular': True}]


@pytest.mark.parametrize(
    'args',
    [
        ['match', EXAMPLE, '--graph', 'H'],
        ['match', EXAMPLE, '--graph', 'G', '--rule', 'r2'],
        ['parse', str(SAMPLES / 'missing.grw')],
        ['life', '--width', '2'],
        ['life', '--cells', '9,9'],
    ]
)
def test_bad_input(args):
    assert main(args) == 2


def test_bad_document(tmp_path):
    path = tmp_path / 'broken.grw'
    path.write_text("graph G { node x@1; }")
    assert main(['parse', str(path)]) == 2


@pytest.mark.parametrize(
    'args',
    [
        [],
        ['step', EXAMPLE],
        ['aut', AUTOMORPHISMS],
        ['aut', AUTOMORPHISMS, '--graph', 'H_par', '--rule', 'r'],
        ['life', '--mode', 'fastest'],
    ]
)
def test_usage_errors(args):
    with pytest.raises(SystemExit) as e:
        main(args)
    assert e.value.code == 2


def test_engine_errors_are_not_input_errors(monkeypatch):
    def broken(rules, g):
        raise UnboundVariable("x")
    monkeypatch.setattr(cli, 'enumerate_all', broken)
    with pytest.raises(UnboundVariable):
        main(['match', EXAMPLE, '--graph', 'G'])
