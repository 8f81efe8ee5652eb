"""Testes do armazenamento de resultados e do gráfico de convergência."""

import json

import pytest

from services.charts import ConvergenceChart
from utils.results_store import (
    CONVERGENCE_FIELDS,
    ResultsStore,
    dumps,
    load_best_so_far,
    load_summary,
)


def test_dumps_is_canonical():
    assert dumps({'a': 1}) == '{\n  "a": 1\n}\n'
    with pytest.raises(ValueError):
        dumps({'a': float('nan')})


def test_write_json_creates_directory(tmp_path):
    store = ResultsStore(tmp_path / 'a' / 'b')
    store.write_json('x.json', {'k': [1, 2]})
    assert store.read_json('x.json') == {'k': [1, 2]}
    assert [p.name for p in store.out_dir.iterdir()] == ['x.json']


def test_write_csv(out_dir):
    store = ResultsStore(out_dir)
    rows = [{'eval_index': 1, 'status': 'ok', 'objective': '1.5', 'feasible': 1, 'best_so_far': '1.5'}]
    store.write_csv('convergence.csv', rows, CONVERGENCE_FIELDS)
    text = (out_dir / 'convergence.csv').read_text(encoding='utf-8')
    assert text == 'eval_index,status,objective,feasible,best_so_far\n1,ok,1.5,1,1.5\n'


def test_load_summary(out_dir, tmp_path):
    assert load_summary(tmp_path / 'missing') is None
    (out_dir / 'summary.json').write_text('{broken', encoding='utf-8')
    assert load_summary(out_dir) is None
    ResultsStore(out_dir).write_json('summary.json', {'algorithm': 'bo'})
    assert load_summary(out_dir) == {'algorithm': 'bo'}


def test_save_run_and_best_so_far(out_dir):
    convergence = [
        {'eval_index': 1, 'status': 'failed', 'objective': '', 'feasible': 0, 'best_so_far': ''},
        {'eval_index': 2, 'status': 'ok', 'objective': '2.0', 'feasible': 1, 'best_so_far': '2.0'},
    ]
    ResultsStore(out_dir).save_run(
        history={'records': []}, convergence=convergence, timings=[],
        summary={'n_fe': 2}, config={'seed': 1},
    )
    names = sorted(p.name for p in out_dir.iterdir())
    assert names == ['config.json', 'convergence.csv', 'history.json', 'summary.json', 'timings.csv']
    assert load_best_so_far(out_dir) == [None, 2.0]
    assert json.loads((out_dir / 'config.json').read_text(encoding='utf-8')) == {'seed': 1}


class TestChart:

    def test_one_polyline_per_run(self):
        from reportlab.graphics.shapes import PolyLine

        drawing = ConvergenceChart().build({
            'a': [None, 3.0, 2.0, 2.0],
            'b': [5.0],
            'c': [None, None],
        })
        lines = [shape for shape in drawing.contents if isinstance(shape, PolyLine)]
        assert len(lines) == 3
        assert lines[2].strokeDashArray is not None
        assert lines[0].strokeDashArray is None

    def test_infeasible_run_still_rendered(self):
        svg = ConvergenceChart().render({
            'a': [None, 7.0, 6.9],
            'b': [None, None, None],
            'c': [8.0, 7.5, 7.5],
        })
        assert svg.count('<polyline') == 3

    def test_render_svg(self):
        svg = ConvergenceChart().render({'bo': [4.0, 3.0], 'nsga2': [5.0, 4.5]})
        assert '<svg' in svg
        assert 'nsga2' in svg
