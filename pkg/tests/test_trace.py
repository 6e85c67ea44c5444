import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from cascade_indi.config import CONTROLLERS, load_config
from cascade_indi.errors import SchemaError
from cascade_indi.sim.scenario import run_scenario
from cascade_indi.trace import COMMON_COLUMNS, Trace, columns_for


def test_columns_start_with_tick_and_time():
    for c in CONTROLLERS:
        assert columns_for(c)[:2] == ("tick", "time_s")
        assert len(set(columns_for(c))) == len(columns_for(c))


def test_indi_paths_share_a_schema():
    assert columns_for("indi-linear") == columns_for("indi-nonlinear") != columns_for("pid")
    assert set(COMMON_COLUMNS) <= set(columns_for("pid"))


@pytest.mark.parametrize("controller", CONTROLLERS)
def test_schema_depends_only_on_controller(controller):
    base = load_config("hover-calm").replace(scenario={"controller": controller, "duration": 0.05})
    other = base.replace(scenario={"seed": 5}, wind={"mode": "constant", "vector": (1.0, 0.0, 0.0)},
                         filter={"bias_estimation": False})
    a, b = run_scenario(base), run_scenario(other)
    assert a.columns == b.columns == columns_for(controller)


@given(arrays(np.float64, (5, 3), elements=st.floats(allow_nan=True, allow_infinity=False, width=64)))
def test_csv_round_trip_is_bit_exact(tmp_path_factory, values):
    tr = Trace(("tick", "time_s", "x"), 5)
    for row_values in values:
        tr.append_row()[:] = row_values
    path = tmp_path_factory.mktemp("csv") / "t.csv"
    tr.to_csv(path)
    back = Trace.from_csv(path)
    assert back.columns == tr.columns
    assert back.equals(tr)
    assert np.array_equal(back.data.view(np.uint64)[~np.isnan(back.data)],
                          tr.data.view(np.uint64)[~np.isnan(tr.data)])


def test_missing_column_is_schema_error():
    tr = Trace(("tick",), 1)
    with pytest.raises(SchemaError):
        tr["pos_n"]
    with pytest.raises(SchemaError):
        tr.vec("pos")


def test_finalize_trims_unused_rows():
    tr = Trace(("a",), 10)
    tr.append_row()[0] = 1.0
    tr.finalize()
    assert len(tr) == 1 and tr.data.shape == (1, 1)


def test_ragged_csv_rejected(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b\n1,2,3\n")
    with pytest.raises(SchemaError):
        Trace.from_csv(path)
