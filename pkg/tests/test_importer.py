import io
import os
import tempfile
import unittest

import numpy as np

from levyma.errors import ConfigError, ShapeError
from levyma.exporter import write_field_sample, write_gridfn_csv, write_loggridfn_csv, write_records_csv
from levyma.fieldsim import FieldSample
from levyma.grids import GridFn, LogGridFn, LogGridSpec, RealGridSpec
from levyma.importer import (
    _infer_value,
    read_columns,
    read_field_sample,
    read_gridfn_csv,
    read_loggridfn_csv,
    read_records_csv,
)
from levyma.window import Window


class TestInferValue(unittest.TestCase):
    def test_cells(self):
        self.assertEqual(_infer_value("3"), 3)
        self.assertEqual(_infer_value("0.25"), 0.25)
        self.assertIs(_infer_value("True"), True)
        self.assertIsNone(_infer_value(""))
        self.assertIsNone(_infer_value("null"))
        self.assertEqual(_infer_value("bump"), "bump")


class TestGrids(unittest.TestCase):
    def test_gridfn_round_trip(self):
        g = GridFn.from_callable(lambda x: np.exp(1j * x), RealGridSpec(-1.0, 1.0, 9))
        buf = io.StringIO()
        write_gridfn_csv(g, buf)
        buf.seek(0)
        back = read_gridfn_csv(buf)
        self.assertTrue(back.aligned(g))
        np.testing.assert_array_equal(back.values, g.values)

    def test_loggridfn_round_trip(self):
        w = LogGridFn.from_callable(lambda x: x**2, LogGridSpec(-1.0, 1.0, 5))
        buf = io.StringIO()
        write_loggridfn_csv(w, buf)
        buf.seek(0)
        back = read_loggridfn_csv(buf)
        np.testing.assert_array_equal(back.neg, w.neg)

    def test_non_uniform_grid(self):
        buf = io.StringIO("x,re,im\n0,1,0\n1,1,0\n3,1,0\n")
        with self.assertRaises(ShapeError):
            read_gridfn_csv(buf)

    def test_missing_columns(self):
        with self.assertRaises(ConfigError):
            read_gridfn_csv(io.StringIO("x,y\n0,1\n1,2\n"))

    def test_non_numeric_cell(self):
        with self.assertRaises(ConfigError) as ctx:
            read_gridfn_csv(io.StringIO("x,re,im\n0,1,0\n1,abc,0\n"))
        self.assertEqual(ctx.exception.line, 3)


class TestFieldSample(unittest.TestCase):
    def test_round_trip(self):
        rng = np.random.default_rng(1)
        sample = FieldSample(Window.box((3, 4), dim=2), 0.5, rng.gamma(1.0, size=12), m=3,
                             seed=7, model="gamma(b=1)", kernel="indicator_cube(1,1)", h=0.25, gamma=1.5)
        buf = io.StringIO()
        write_field_sample(sample, buf)
        buf.seek(0)
        back = read_field_sample(buf)
        np.testing.assert_array_equal(back.values, sample.values)
        self.assertEqual(back.window.shape, (3, 4))
        self.assertEqual(back.m, 3)
        self.assertEqual(back.seed, 7)
        self.assertEqual(back.gamma, 1.5)
        self.assertEqual(back.kernel, "indicator_cube(1,1)")

    def test_missing_header(self):
        with self.assertRaises(ConfigError):
            read_field_sample(io.StringIO("# d=1\n# delta=1.0\nj_1,y\n0,1.0\n"))

    def test_incomplete_box(self):
        text = "# d=1\n# delta=1.0\n# m=2\nj_1,y\n0,1.0\n2,1.0\n"
        with self.assertRaises(ShapeError):
            read_field_sample(io.StringIO(text))


class TestRecords(unittest.TestCase):
    def test_records_round_trip(self):
        records = [{"n": 64, "v": "bump", "err": -0.5, "zero": False}]
        buf = io.StringIO()
        write_records_csv(records, buf)
        buf.seek(0)
        self.assertEqual(read_records_csv(buf), records)

    def test_read_columns_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "v0.csv")
            with open(path, "w") as f:
                f.write("x,v0\n1.0,0.5\n2.0,0.25\n")
            cols = read_columns(path, ("x", "v0"))
        np.testing.assert_array_equal(cols["v0"], [0.5, 0.25])

    def test_read_columns_missing_file(self):
        with self.assertRaises(ConfigError):
            read_columns("/nonexistent/v0.csv", ("x", "v0"))


if __name__ == "__main__":
    unittest.main()
