import itertools
import logging
import math
import os
import tempfile
import unittest

import numpy as np

from sparse_grid_gp.designs import (ComponentSchedule, build_lattice,
                                    build_lhs, build_sparse_grid,
                                    builtin_schedules, export_design_csv,
                                    index_set_J, index_set_P, lattice_axis,
                                    load_design, load_schedule_file,
                                    resolve_schedules, sample_size,
                                    sample_size_closed_form,
                                    schedule_from_increments,
                                    smolyak_coefficient)
from sparse_grid_gp.exceptions import (InvalidDesignError, InvalidLevelError,
                                       InvalidScheduleError,
                                       ScheduleTooShortError)
from sparse_grid_gp.test.helpers.constant import SCHEDULES, SMALL_LEVELS
from sparse_grid_gp.test.helpers.utils import slow_tests_enabled, small_design

logger = logging.getLogger()


def _schedules_with_sizes(d, sizes):
    """Schedules whose level-j design holds sizes[j-1] points."""
    coords = np.linspace(0.0, 1.0, sizes[-1])
    increments = [tuple(coords[a:b]) for a, b in zip([0] + list(sizes[:-1]), sizes)]
    return [schedule_from_increments(i + 1, increments) for i in range(d)]


class TestIndexSets(unittest.TestCase):

    def test_level_equal_to_dimension(self):
        for d in range(1, 6):
            with self.subTest(d=d):
                self.assertEqual(index_set_J(d, d), [(1,) * d])
                self.assertEqual(index_set_P(d, d), [(1,) * d])
                self.assertEqual(smolyak_coefficient((1,) * d, d, d), 1)

    def test_invalid_level(self):
        with self.assertRaises(InvalidLevelError):
            index_set_J(2, 3)
        with self.assertRaises(InvalidLevelError):
            index_set_P(0, 1)

    def test_index_sets_are_sorted_and_bounded(self):
        for d, eta in [(2, 5), (3, 7), (4, 6)]:
            with self.subTest(d=d, eta=eta):
                J = index_set_J(eta, d)
                P = index_set_P(eta, d)
                self.assertEqual(J, sorted(J))
                self.assertEqual(P, sorted(P))
                self.assertEqual(len(J), math.comb(eta, d))
                self.assertTrue(set(P) <= set(J))
                for j in P:
                    self.assertTrue(max(d, eta - d + 1) <= sum(j) <= eta)

    def test_coefficients_sum_to_one(self):
        for d in range(1, 7):
            for eta in range(d, d + 7):
                with self.subTest(d=d, eta=eta):
                    self.assertEqual(sum(smolyak_coefficient(j, eta, d) for j in index_set_P(eta, d)), 1)

    def test_coefficient_values(self):
        self.assertEqual(smolyak_coefficient((2, 3), 5, 2), 1)
        self.assertEqual(smolyak_coefficient((1, 3), 5, 2), -1)
        self.assertEqual(smolyak_coefficient((1, 1, 2), 5, 3), -2)


class TestComponentSchedule(unittest.TestCase):

    def test_nested_prefixes(self):
        schedule = builtin_schedules("centered", 1, 5)[0]
        for level in range(1, 5):
            with self.subTest(level=level):
                inner = set(schedule.points(level))
                outer = set(schedule.points(level + 1))
                self.assertTrue(inner < outer)
        self.assertEqual(schedule.size(0), 0)
        self.assertEqual([schedule.size(level) for level in range(1, 6)], [1, 3, 5, 7, 9])

    def test_boundary_and_hyperbolic_sizes(self):
        boundary = builtin_schedules("boundary", 1, 4)[0]
        self.assertEqual(list(boundary.points(2)), [0.5, 0.0, 1.0])
        hyperbolic = builtin_schedules("hyperbolic", 1, 4)[0]
        self.assertEqual([hyperbolic.size(level) for level in range(1, 5)], [1, 3, 7, 15])
        self.assertEqual(sorted(hyperbolic.points(3)), [k / 8 for k in range(1, 8)])

    def test_refinement_beyond_the_table(self):
        schedule = builtin_schedules("centered", 1, 10)[0]
        self.assertEqual(schedule.max_level, 10)
        self.assertEqual(len(set(schedule.coordinates)), len(schedule.coordinates))

    def test_rejects_bad_schedules(self):
        with self.assertRaises(InvalidScheduleError):
            ComponentSchedule(1, (0.5, 0.5), (1, 2))
        with self.assertRaises(InvalidScheduleError):
            ComponentSchedule(1, (0.5, 1.5), (1, 2))
        with self.assertRaises(InvalidScheduleError):
            ComponentSchedule(1, (0.5, 0.25), (0, 2))
        with self.assertRaises(InvalidScheduleError):
            builtin_schedules("chebyshev", 2, 3)

    def test_too_short(self):
        schedules = [schedule_from_increments(i + 1, [(0.5,), (0.25, 0.75)]) for i in range(2)]
        with self.assertRaises(ScheduleTooShortError):
            build_sparse_grid(schedules, 4)
        with self.assertRaises(ScheduleTooShortError):
            schedules[0].size(3)

    def test_load_schedule_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "schedule.txt")
            with open(path, "w") as f:
                f.write("# dim level coordinates\n1 1 0.5\n1 2 0.1 0.9\n2 1 0.4\n2 2 0.2 0.8\n")
            schedules = load_schedule_file(path)
            self.assertEqual(len(schedules), 2)
            self.assertEqual(schedules[1].coordinates, (0.4, 0.2, 0.8))
            self.assertEqual(resolve_schedules(path, 2, 3)[0].coordinates, (0.5, 0.1, 0.9))
            with open(path, "a") as f:
                f.write("2 2 0.3\n")
            with self.assertRaises(InvalidScheduleError):
                load_schedule_file(path)


class TestSparseGrid(unittest.TestCase):

    def test_forty_one_point_design(self):
        design = small_design("boundary", 2, 6)
        self.assertEqual(design.N, 41)
        self.assertEqual(design.points.shape, (41, 2))
        self.assertEqual(design.schedules[0].increments(),
                         [(0.5,), (0.0, 1.0), (0.25, 0.75), (0.375, 0.625), (0.125, 0.875)])
        self.assertEqual(small_design("centered", 2, 6).N, 41)

    def test_single_point_design(self):
        for schedule in SCHEDULES:
            with self.subTest(schedule=schedule):
                design = small_design(schedule, 3, 3)
                self.assertEqual(design.N, 1)
                np.testing.assert_array_equal(design.points, [[0.5, 0.5, 0.5]])

    def test_points_are_unique_and_counted(self):
        for schedule in SCHEDULES:
            for d, eta in SMALL_LEVELS:
                with self.subTest(schedule=schedule, d=d, eta=eta):
                    design = small_design(schedule, d, eta)
                    self.assertEqual(np.unique(design.points, axis=0).shape[0], design.N)
                    self.assertEqual(design.N, sample_size(design.schedules, eta))

    def test_lattice_maps_match_cartesian_products(self):
        for schedule in SCHEDULES:
            for d, eta in [(2, 5), (3, 6)]:
                design = small_design(schedule, d, eta)
                for j in index_set_J(eta, d):
                    with self.subTest(schedule=schedule, j=j):
                        expected = build_lattice([design.schedules[i].points(j[i]) for i in range(d)])
                        np.testing.assert_array_equal(design.lattice_points(j), expected)

    def test_union_of_lattices_is_the_design(self):
        design = small_design("boundary", 3, 6)
        covered = np.unique(np.concatenate(list(design.lattice_maps.values())))
        np.testing.assert_array_equal(covered, np.arange(design.N))

    def test_designs_are_nested_in_level(self):
        for schedule in SCHEDULES:
            for d in (1, 2, 3):
                for eta in range(d, d + 4):
                    with self.subTest(schedule=schedule, d=d, eta=eta):
                        inner = {tuple(p) for p in small_design(schedule, d, eta).points}
                        outer = {tuple(p) for p in small_design(schedule, d, eta + 1).points}
                        self.assertTrue(inner <= outer)

    def test_deterministic(self):
        first = small_design("centered", 3, 6)
        second = small_design("centered", 3, 6)
        np.testing.assert_array_equal(first.slots, second.slots)
        np.testing.assert_array_equal(first.points, second.points)

    def test_level_below_dimension(self):
        with self.assertRaises(InvalidLevelError):
            small_design("centered", 3, 2)


class TestSampleSize(unittest.TestCase):

    def test_linear_and_affine_forms(self):
        for c in (1, 2, 3):
            for d in range(1, 6):
                for eta in range(d, d + 6):
                    L = eta - d + 1
                    with self.subTest(c=c, d=d, eta=eta):
                        linear = _schedules_with_sizes(d, [c * j for j in range(1, L + 1)])
                        self.assertEqual(sample_size(linear, eta),
                                         sample_size_closed_form("linear", c, d, eta))
                        affine = _schedules_with_sizes(d, [c * (j - 1) + 1 for j in range(1, L + 1)])
                        self.assertEqual(sample_size(affine, eta),
                                         sample_size_closed_form("affine", c, d, eta))

    def test_random_increment_schedules(self):
        rng = np.random.default_rng(13)
        for trial in range(25):
            d = int(rng.integers(1, 5))
            eta = d + int(rng.integers(0, 5))
            L = eta - d + 1
            schedules = []
            for i in range(d):
                counts = [int(rng.integers(1, 4))] + [int(c) for c in rng.integers(0, 4, size=L - 1)]
                pool = iter(rng.permutation(np.linspace(0.0, 1.0, sum(counts))))
                increments = [[next(pool) for _ in range(c)] for c in counts]
                schedules.append(schedule_from_increments(i + 1, increments))
            with self.subTest(trial=trial, d=d, eta=eta):
                expected = sum(
                    math.prod(s.size(j[i]) - s.size(j[i] - 1) for i, s in enumerate(schedules))
                    for j in index_set_J(eta, d))
                union = set()
                for j in index_set_J(eta, d):
                    union.update(itertools.product(*[s.points(j[i]) for i, s in enumerate(schedules)]))
                self.assertEqual(sample_size(schedules, eta), expected)
                self.assertEqual(build_sparse_grid(schedules, eta).N, expected)
                self.assertEqual(len(union), expected)

    def test_geometric_form(self):
        for d in range(1, 5):
            for eta in range(d, d + 5):
                with self.subTest(d=d, eta=eta):
                    schedules = builtin_schedules("hyperbolic", d, eta - d + 1)
                    self.assertEqual(sample_size(schedules, eta),
                                     sample_size_closed_form("geometric", 2, d, eta))

    def test_centered_is_affine(self):
        self.assertEqual(sample_size_closed_form("affine", 2, 2, 6), 41)
        self.assertEqual(sample_size_closed_form("affine", 2, 4, 7), 129)

    def test_seventy_dimensions(self):
        self.assertEqual(sample_size_closed_form("affine", 2, 70, 73), 467321)

    @unittest.skipUnless(slow_tests_enabled(), "set SPARSE_GRID_GP_SLOW=1 to run")
    def test_seventy_dimensions_by_enumeration(self):
        self.assertEqual(sample_size(builtin_schedules("centered", 70, 4), 73), 467321)


class TestBaselineDesigns(unittest.TestCase):

    def test_lattice(self):
        pts = build_lattice([lattice_axis(2), lattice_axis(3)])
        self.assertEqual(pts.shape, (6, 2))
        np.testing.assert_array_equal(pts[:3], [[0.25, 0.0], [0.25, 0.5], [0.25, 1.0]])
        with self.assertRaises(InvalidDesignError):
            build_lattice([[0.1, 0.1]])
        with self.assertRaises(InvalidDesignError):
            build_lattice([[]])

    def test_latin_hypercube_strata(self):
        pts = build_lhs(17, 3, seed=4)
        self.assertEqual(pts.shape, (17, 3))
        for i in range(3):
            with self.subTest(column=i):
                self.assertEqual(sorted(np.floor(pts[:, i] * 17).astype(int)), list(range(17)))
        np.testing.assert_array_equal(pts, build_lhs(17, 3, seed=4))
        self.assertFalse(np.array_equal(pts, build_lhs(17, 3, seed=5)))
        self.assertTrue(np.all((pts >= 0) & (pts < 1)))


class TestDesignExport(unittest.TestCase):

    def test_sparse_grid_round_trip(self):
        design = small_design("centered", 3, 5)
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "pts.csv")
            export_design_csv(design, path)
            points, rebuilt = load_design(path)
            np.testing.assert_array_equal(points, design.points)
            self.assertIsNotNone(rebuilt)
            self.assertEqual(rebuilt.N, design.N)

    def test_plain_points_have_no_structure(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "lhs.csv")
            export_design_csv(build_lhs(5, 2, seed=1), path)
            _, rebuilt = load_design(path)
            self.assertIsNone(rebuilt)

    def test_mismatched_sidecar(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "pts.csv")
            export_design_csv(small_design("centered", 2, 4), path)
            os.replace(path, path + ".bak")
            export_design_csv(small_design("centered", 2, 3).points, path)
            with self.assertRaises(InvalidDesignError):
                load_design(path)


if __name__ == "__main__":
    unittest.main()
