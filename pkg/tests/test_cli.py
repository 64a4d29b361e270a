import io
import json
import os
import tempfile
import unittest
from contextlib import redirect_stderr, redirect_stdout
from unittest import mock

from main import EXIT_FAILED, EXIT_OK, EXIT_USAGE, run


class CliTestCase(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        patcher = mock.patch.dict(os.environ, {'TROPICAL_REPORT_DIR': self.tmp.name, 'TROPICAL_SWEEP_WORKERS': '1'})
        patcher.start()
        self.addCleanup(patcher.stop)
        self.addCleanup(self.tmp.cleanup)

    def cli(self, *argv):
        out, err = io.StringIO(), io.StringIO()
        with redirect_stdout(out), redirect_stderr(err):
            code = run(list(argv))
        return code, out.getvalue(), err.getvalue()

    def path(self, name):
        return os.path.join(self.tmp.name, name)


class TestTwelve(CliTestCase):
    def test_catalog_star(self):
        code, out, _ = self.cli("twelve-check", "--star", "p2")
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(out.strip(), "12 = 12·1")

    def test_non_polygon_stars(self):
        for star in ("f3", "f4"):
            code, _, _ = self.cli("twelve-check", "--star", star)
            self.assertEqual(code, EXIT_OK, star)

    def test_json(self):
        code, out, _ = self.cli("twelve-check", "--star", "3", "--json")
        payload = json.loads(out)
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(payload['lhs'], 12)
        self.assertEqual(payload['toric_oracle'], 12)
        self.assertIn('schema', payload)

    def test_unknown_star(self):
        code, _, err = self.cli("twelve-check", "--star", "no-such-star")
        self.assertEqual(code, EXIT_USAGE)
        self.assertIn("error:", err)


class TestLoop(CliTestCase):
    def test_legal_loop(self):
        code, out, _ = self.cli("loop", "[[1,0],[0,1],[-1,-1]]")
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(out.strip(), "12 = 12·1")

    def test_double_loop(self):
        code, out, _ = self.cli("loop", "[[1,0],[0,1],[-1,-1],[1,0],[0,1],[-1,-1]]", "--json")
        self.assertEqual(code, EXIT_OK)
        payload = json.loads(out)
        self.assertEqual((payload['lhs'], payload['w']), (24, 2))

    def test_illegal_loop(self):
        code, out, _ = self.cli("loop", "[[1,0],[0,2],[-1,-1]]")
        self.assertEqual(code, EXIT_FAILED)
        self.assertTrue(out.startswith("illegal loop at index"))

    def test_loop_from_file(self):
        with open(self.path("loop.json"), 'w') as f:
            json.dump({'vectors': [[1, 0], [0, 1], [-1, 3], [0, -1]]}, f)
        code, out, _ = self.cli("loop", self.path("loop.json"), "--dual")
        self.assertEqual(code, EXIT_OK)
        self.assertIn("dual loop:", out)

    def test_missing_file(self):
        code, _, _ = self.cli("loop", self.path("absent.json"))
        self.assertEqual(code, EXIT_USAGE)


class TestCatalog(CliTestCase):
    def test_all_entries(self):
        code, out, _ = self.cli("catalog", "--json")
        payload = json.loads(out)
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(len(payload['polygons']), 16)
        self.assertEqual(sum(p['self_dual'] for p in payload['polygons']), 4)

    def test_dual(self):
        code, out, _ = self.cli("dual", "p2", "--json")
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(len(json.loads(out)['dual']), 3)


class TestComplexCommands(CliTestCase):
    def test_build_then_inspect(self):
        target = self.path("ak.json")
        code, out, _ = self.cli("build", "local", "--model", "Ak", "--k", "2", "-o", target)
        self.assertEqual(code, EXIT_OK)
        self.assertIn("written to", out)
        self.assertTrue(os.path.exists(target))

        code, out, _ = self.cli("monodromy", target, "--json")
        self.assertEqual(code, EXIT_OK)
        self.assertTrue(json.loads(out)['consistent'])

        code, _, _ = self.cli("legendre", target, "-o", self.path("ak-dual.json"))
        self.assertEqual(code, EXIT_OK)
        self.assertTrue(os.path.exists(self.path("ak-dual.json")))

        code, out, _ = self.cli("render", target, "-o", self.path("ak.svg"))
        self.assertEqual(code, EXIT_OK)
        with open(self.path("ak.svg")) as f:
            self.assertIn("<svg", f.read())

    def test_build_default_location(self):
        code, out, _ = self.cli("build", "elliptic", "--polygon", "p2", "--json")
        record = json.loads(out)
        self.assertEqual(code, EXIT_OK)
        self.assertTrue(record['path'].startswith(self.tmp.name))
        self.assertTrue(os.path.exists(record['path']))
        self.assertTrue(os.path.isdir(os.path.join(self.tmp.name, 'build')))

    def test_build_schoen(self):
        code, out, _ = self.cli("build", "schoen", "--p1", "p2", "--p2", "p2dual", "--variant", "O",
                                "-o", self.path("o.json"), "--json")
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(json.loads(out)['dimension'], 3)

    def test_operation_not_available(self):
        code, _, err = self.cli("build", "local", "--model", "gorenstein", "--polygon", "[[0,0],[1,0],[0,1]]",
                                "--smooth")
        self.assertEqual(code, EXIT_USAGE)
        self.assertIn("no smooth operation", err)

    def test_missing_complex(self):
        code, _, _ = self.cli("monodromy", self.path("nothing.json"))
        self.assertEqual(code, EXIT_USAGE)

    def test_complex_with_a_bad_field(self):
        target = self.path("bad.json")
        with open(target, 'w') as f:
            json.dump({'schema': 'tropical-complex', 'version': 1, 'dim': 2,
                       'cells': [{'name': 'x', 'vertices': [1]}], 'fans': [], 'gluings': [], 'loci': []}, f)
        for argv in (("monodromy", target), ("legendre", target), ("render", target, "-o", self.path("bad.svg"))):
            code, _, err = self.cli(*argv)
            self.assertEqual(code, EXIT_USAGE, argv[0])
            self.assertIn("error:", err)

    def test_unknown_command(self):
        code, _, _ = self.cli("frobnicate")
        self.assertEqual(code, EXIT_USAGE)


class TestVerify(CliTestCase):
    def test_single_suite(self):
        code, out, _ = self.cli("verify", "twelve")
        self.assertEqual(code, EXIT_OK)
        self.assertIn("ALL PASS", out)
        self.assertTrue(os.path.exists(os.path.join(self.tmp.name, 'verify', 'suite_twelve.json')))

    def test_suite_option(self):
        code, out, _ = self.cli("verify", "--suite", "twelve-w", "--loops", "50", "--json")
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(json.loads(out)['suites'][0]['details']['loops'], 50)

    def test_unknown_suite(self):
        code, _, _ = self.cli("verify", "thirteen")
        self.assertEqual(code, EXIT_USAGE)

    def test_bad_worker_count(self):
        with mock.patch.dict(os.environ, {'TROPICAL_SWEEP_WORKERS': '0'}):
            code, _, err = self.cli("verify", "schoen")
        self.assertEqual(code, EXIT_USAGE)
        self.assertIn("TROPICAL_SWEEP_WORKERS", err)


if __name__ == '__main__':
    unittest.main()
