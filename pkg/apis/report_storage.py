import os
import json
from datetime import datetime
from typing import Dict, Optional, Tuple

CATEGORIES = ('verify', 'schoen', 'build')


def _safe_name(label: str) -> str:
    return label.replace(" ", "_").replace("/", "_")


class ReportStorage:
    """Verification reports and built complexes on disk, each as JSON plus a readable TXT copy."""

    def __init__(self, base_dir: Optional[str] = None):
        self.base_dir = base_dir or os.getenv('TROPICAL_REPORT_DIR', 'analysis_output')
        self.ensure_directories()

    def ensure_directories(self):
        """Ensure all required directories exist"""
        for dir_name in CATEGORIES:
            dir_path = os.path.join(self.base_dir, dir_name)
            os.makedirs(dir_path, exist_ok=True)

    def _save_report(self, category: str, identifier: str, content: Dict, text: str) -> Tuple[str, str]:
        """Save a report to its category directory in both JSON and TXT formats"""
        if category not in CATEGORIES:
            raise ValueError(f"unknown report category '{category}'")
        timestamp = datetime.now().strftime("%Y-%m-%d_%H-%M-%S")

        report_data = {
            "content": content,
            "timestamp": timestamp,
            "identifier": identifier
        }

        json_path = os.path.join(self.base_dir, category, f"{identifier}.json")
        txt_path = os.path.join(self.base_dir, category, f"{identifier}.txt")

        with open(json_path, 'w') as f:
            json.dump(report_data, f, indent=2, sort_keys=True)

        with open(txt_path, 'w') as f:
            f.write(f"Report for {identifier}\n")
            f.write(f"Generated on: {timestamp}\n")
            f.write("-" * 80 + "\n\n")
            f.write(text)

        return json_path, txt_path

    def save_verification_report(self, suite: str, report: Dict, text: str) -> Tuple[str, str]:
        """Save the outcome of one verification suite (or of the whole run for 'all')"""
        return self._save_report('verify', f"suite_{suite}", report, text)

    def save_schoen_report(self, pair_label: str, report: Dict, text: str) -> Tuple[str, str]:
        """Save the sweep record of one Schoen polygon pair"""
        return self._save_report('schoen', _safe_name(pair_label), report, text)

    def save_build(self, name: str, document: Dict, text: str) -> Tuple[str, str]:
        """Save the serialized document of a built complex"""
        return self._save_report('build', _safe_name(name), document, text)

    def get_latest_report(self, category: str, identifier: str) -> Optional[Dict]:
        """Get the latest report for a given category and identifier"""
        file_path = os.path.join(self.base_dir, category, f"{identifier}.json")
        try:
            with open(file_path, 'r') as f:
                return json.load(f)
        except FileNotFoundError:
            return None
