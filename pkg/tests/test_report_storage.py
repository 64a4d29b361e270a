import os
import tempfile
import unittest
from unittest import mock

from apis.report_storage import ReportStorage


class TestReportStorage(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.storage = ReportStorage(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def test_directories(self):
        for category in ('verify', 'schoen', 'build'):
            self.assertTrue(os.path.isdir(os.path.join(self.tmp.name, category)))

    def test_save_and_read_back(self):
        json_path, txt_path = self.storage.save_verification_report("twelve", {'ok': True}, "twelve: PASS")
        self.assertTrue(json_path.endswith(os.path.join('verify', 'suite_twelve.json')))
        latest = self.storage.get_latest_report('verify', 'suite_twelve')
        self.assertEqual(latest['content'], {'ok': True})
        self.assertEqual(latest['identifier'], 'suite_twelve')
        with open(txt_path) as f:
            text = f.read()
        self.assertTrue(text.startswith("Report for suite_twelve\nGenerated on: "))
        self.assertIn("-" * 80, text)
        self.assertTrue(text.endswith("twelve: PASS"))

    def test_safe_names(self):
        json_path, _ = self.storage.save_schoen_report("pair 1/2", {'ok': False}, "")
        self.assertTrue(json_path.endswith("pair_1_2.json"))

    def test_missing_report(self):
        self.assertIsNone(self.storage.get_latest_report('build', 'nothing-here'))

    def test_unknown_category(self):
        with self.assertRaises(ValueError):
            self.storage._save_report('elsewhere', 'x', {}, "")

    def test_directory_from_environment(self):
        target = os.path.join(self.tmp.name, 'from-env')
        with mock.patch.dict(os.environ, {'TROPICAL_REPORT_DIR': target}):
            storage = ReportStorage()
        self.assertEqual(storage.base_dir, target)
        self.assertTrue(os.path.isdir(os.path.join(target, 'schoen')))


if __name__ == '__main__':
    unittest.main()
