import freephil
import pytest

from shapephase import phil_types

master_str = """
x = 0.1
  .type = real
xs = 1 2 3
  .type = reals(size=3, value_min=0)
v = None
  .type = vec3s(size=2)
"""


@pytest.fixture
def master():
    return freephil.parse(master_str, converter_registry=phil_types.converter_registry)


def extract(master, text):
    return master.fetch(source=freephil.parse(text)).extract()


def test_defaults(master):
    params = master.extract()
    assert params.x == 0.1
    assert params.xs == [1.0, 2.0, 3.0]
    assert params.v is None


def test_vec3s_grouped_and_flat(master):
    expected = [[1.0, 0.0, 0.0], [-0.5, 0.866, 0.0]]
    assert extract(master, "v = (1, 0, 0) (-0.5, 0.866, 0)").v == expected
    assert extract(master, "v = 1 0 0 -0.5 0.866 0").v == expected
    assert extract(master, "v = [1,0,0],[-0.5,0.866,0]").v == expected


def test_vec3s_errors(master):
    with pytest.raises(RuntimeError, match="groups of three"):
        extract(master, "v = 1 2 3 4")
    with pytest.raises(RuntimeError, match="exactly 2 vectors"):
        extract(master, "v = 1 2 3")


def test_full_precision_round_trip(master):
    value = 0.1 + 0.2
    params = extract(master, "x = %r\nv = (%r, 1, 2) (3, 4, 5)" % (value, value))
    text = master.format(python_object=params).as_str()
    assert "0.30000000000000004" in text
    assert "v = (0.30000000000000004, 1.0, 2.0) (3.0, 4.0, 5.0)" in text
    again = extract(master, text)
    assert again.x == value
    assert again.v == params.v


def test_reals_bounds(master):
    with pytest.raises(RuntimeError):
        extract(master, "xs = 1 2")
    with pytest.raises(RuntimeError):
        extract(master, "xs = 1 -2 3")


def test_converter_names():
    assert str(phil_types.vec3s_converters(size=3)) == "vec3s(size=3)"
    assert str(phil_types.vec3s_converters()) == "vec3s"
