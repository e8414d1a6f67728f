import os
import tempfile
import unittest

import numpy as np
import pandas as pd

from sparse_grid_gp import settings
from sparse_grid_gp.exceptions import ConfigError, ShapeError
from sparse_grid_gp.utils import (parse_config, read_observations_csv,
                                  read_points_csv, rng_stream,
                                  write_points_csv)


class TestParseConfig(unittest.TestCase):

    def test_overrides_defaults(self):
        text = """
        # small run
        d = 3
        etas = 4, 5,6
        phi = 0.5
        strategies = sparse_grid
        record_seconds = yes
        """
        config = parse_config(text, settings.RMSPE_CONFIG)
        self.assertEqual(config["d"], 3)
        self.assertEqual(config["etas"], [4, 5, 6])
        self.assertEqual(config["phi"], 0.5)
        self.assertEqual(config["strategies"], ["sparse_grid"])
        self.assertIs(config["record_seconds"], True)
        self.assertEqual(config["n_mc"], settings.N_MC)
        self.assertEqual(settings.RMSPE_CONFIG["etas"], [5, 6, 7])

    def test_float_from_integer_text(self):
        self.assertEqual(parse_config("phi_lo = 1", settings.MAPE_CONFIG)["phi_lo"], 1.0)

    def test_rejects_bad_lines(self):
        for text in ("draws = 3", "d: 3", "d = three", "record_seconds = maybe"):
            with self.subTest(text=text):
                with self.assertRaises(ConfigError):
                    parse_config(text, settings.RMSPE_CONFIG)


class TestFiles(unittest.TestCase):

    def test_points_round_trip(self):
        points = np.random.default_rng(0).random((7, 3))
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "points.csv")
            write_points_csv(path, points)
            ids, loaded = read_points_csv(path)
        np.testing.assert_array_equal(ids, np.arange(7))
        np.testing.assert_array_equal(loaded, points)

    def test_observations_follow_ids(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "obs.csv")
            pd.DataFrame({"id": [2, 0, 1], "y": [0.3, 0.1, 0.2]}).to_csv(path, index=False)
            np.testing.assert_array_equal(read_observations_csv(path, 3), [0.1, 0.2, 0.3])
            with self.assertRaises(ShapeError):
                read_observations_csv(path, 4)


class TestRngStream(unittest.TestCase):

    def test_streams_are_keyed(self):
        a = rng_stream(5, 1, 3).random(4)
        np.testing.assert_array_equal(a, rng_stream(5, 1, 3).random(4))
        self.assertFalse(np.array_equal(a, rng_stream(5, 1, 4).random(4)))
        self.assertFalse(np.array_equal(a, rng_stream(6, 1, 3).random(4)))


if __name__ == "__main__":
    unittest.main()
