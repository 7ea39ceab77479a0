import csv
import io
import json

import numpy as np
import pytest

from puritydist import pdf_3x3
from puritydist.cli import exact_decimal, fmt, main
from puritydist.solver import SolutionCache


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.reader(io.StringIO(text)))


def test_pdf_single(capsys):
    code, out, _ = run(capsys, 'pdf', '--p', '2', '--q', '2', '--r', '1.0')
    assert code == 0
    assert rows(out) == [['R', 'density', 'formula'],
                         ['1', '3', 'closed-2xq']]
    assert '\r' not in out


def test_pdf_below_support(capsys):
    _, out, _ = run(capsys, 'pdf', '--p', '3', '--q', '3', '--r', '0.3')
    assert float(rows(out)[1][1]) == 0


def test_pdf_grid(capsys):
    _, out, _ = run(capsys, 'pdf', '--p', '4', '--q', '4', '--grid', '5')
    r = rows(out)[1:]
    assert len(r) == 5
    assert float(r[0][0]) == 0.25 and float(r[-1][0]) == 1.0
    assert {x[2] for x in r} == {'closed-4x4'}


def test_pdf_linear_entropy(capsys):
    _, out, _ = run(capsys, 'pdf', '--p', '3', '--q', '3', '--grid', '3',
                    '--variable', 'linear-entropy')
    r = rows(out)
    assert r[0][0] == 'S_L'
    assert [row[0] for row in r[1:]] == ['0', '0.5', '1']
    # S_L = 1/2 is R = 2/3; the density picks up the Jacobian 2/3
    assert float(r[2][1]) == pytest.approx(2 / 3 * pdf_3x3()(2 / 3),
                                           rel=1e-14)


def test_pdf_csv_json_agree(capsys):
    _, c, _ = run(capsys, 'pdf', '--p', '3', '--q', '5', '--grid', '7')
    _, j, _ = run(capsys, 'pdf', '--p', '3', '--q', '5', '--grid', '7',
                  '--format', 'json')
    from_csv = [float(r[1]) for r in rows(c)[1:]]
    from_json = [r['density'] for r in json.loads(j)['rows']]
    assert from_csv == from_json


def test_pdf_usage_errors(capsys):
    code, _, err = run(capsys, 'pdf', '--p', '5', '--q', '5', '--r', '0.5')
    assert code == 2 and 'supported' in err
    code, _, _ = run(capsys, 'pdf', '--p', '2', '--q', '2')
    assert code == 2
    code, _, _ = run(capsys, 'pdf', '--p', '2', '--q', '2', '--r', '1',
                     '--grid', '3')
    assert code == 2


def test_moments(capsys):
    _, out, _ = run(capsys, 'moments', '--p', '2', '--q', '2', '--n-max', '2')
    assert rows(out) == [['n', 'fraction', 'decimal'], ['0', '1/1', '1'],
                         ['1', '4/5', '0.8'],
                         ['2', '23/35', '0.65714285714285714']]
    _, out, _ = run(capsys, 'moments', '--p', '3', '--q', '3', '--n-max', '1',
                    '--format', 'json')
    data = json.loads(out)
    assert data['moments'][1]['fraction'] == '3/5'
    assert out == json.dumps(data, sort_keys=True, indent=1) + '\n'


def test_exact_decimal():
    from fractions import Fraction
    assert exact_decimal(Fraction(2, 3)) == '0.66666666666666667'
    assert exact_decimal(Fraction(1, 1)) == '1'


def test_sample(capsys, tmp_path):
    code, out, _ = run(capsys, 'sample', '--p', '3', '--q', '4', '--count',
                       '3', '--seed', '1')
    r = rows(out)
    assert code == 0 and r[0] == ['purity'] and len(r) == 4
    assert all(1 / 3 <= float(x[0]) <= 1 for x in r[1:])
    a, b = tmp_path / 'a.csv', tmp_path / 'b.csv'
    main(['sample', '--p', '2', '--q', '3', '--count', '50', '--seed', '4',
          '--out', str(a)])
    main(['sample', '--p', '2', '--q', '3', '--count', '50', '--seed', '4',
          '--out', str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_csv_exact_roundtrip():
    xs = np.random.default_rng(0).uniform(size=1000)
    assert all(float(fmt(x)) == x for x in xs)


def test_validate_pass(capsys):
    code, out, _ = run(capsys, 'validate', '--p', '2', '--q', '4', '--count',
                       '100000', '--seed', '1')
    rep = json.loads(out)
    assert code == 0 and rep['pass'] is True
    assert rep['formula'] == 'closed-2xq'


def test_validate_negative_control(capsys):
    code, out, _ = run(capsys, 'validate', '--p', '3', '--q', '3',
                       '--pdf-p', '2', '--pdf-q', '2', '--allow-mismatch',
                       '--count', '10000')
    assert code == 1
    assert json.loads(out)['pass'] is False


def test_validate_mismatch_needs_flag(capsys):
    code, _, err = run(capsys, 'validate', '--p', '3', '--q', '3',
                       '--pdf-p', '2', '--pdf-q', '2', '--count', '10000')
    assert code == 2 and 'allow-mismatch' in err


def test_validate_too_few(capsys):
    code, _, _ = run(capsys, 'validate', '--p', '2', '--q', '2', '--count',
                     '10')
    assert code == 2


def test_solve4xq_cache(capsys, tmp_path, solved):
    SolutionCache(tmp_path).store(solved(4))
    code1, out1, err1 = run(capsys, 'solve4xq', '--q', '4', '--cache',
                            str(tmp_path))
    code2, out2, err2 = run(capsys, 'solve4xq', '--q', '4', '--cache',
                            str(tmp_path))
    assert code1 == code2 == 0
    assert 'cache hit' in err2
    assert out1 == out2
    data = json.loads(out1)
    assert data['max_deviation_from_closed_form'] < 1e-8
    assert data['max_held_out_error'] < 1e-8
    assert len(data['unknowns']) == 84


def test_solve4xq_q5_report(capsys, tmp_path, solved):
    SolutionCache(tmp_path).store(solved(5))
    code, out, _ = run(capsys, 'solve4xq', '--q', '5', '--cache',
                       str(tmp_path))
    data = json.loads(out)
    assert code == 0
    assert len(data['held_out']) == 10
    assert data['max_held_out_error'] <= 1e-8
    assert 'max_deviation_from_closed_form' not in data


def test_solve4xq_insufficient_precision(capsys):
    code, _, err = run(capsys, 'solve4xq', '--q', '4', '--precision', '60',
                       '--moment-basis', 'monomial')
    assert code == 3 and 'precision' in err


def test_force_solver_flag(capsys, tmp_path, solved):
    SolutionCache(tmp_path).store(solved(4))
    _, out, _ = run(capsys, 'pdf', '--p', '4', '--q', '4', '--grid', '4',
                    '--force-solver', '--cache', str(tmp_path))
    r = rows(out)[1:]
    assert {x[2] for x in r} == {'solver-4xq'}
    _, ref, _ = run(capsys, 'pdf', '--p', '4', '--q', '4', '--grid', '4')
    for a, b in zip(r, rows(ref)[1:]):
        assert float(a[1]) == pytest.approx(float(b[1]), abs=1e-8)
