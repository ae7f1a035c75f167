"""Pass/fail residual reports shared by the CLI and the test suite."""

import json
from dataclasses import dataclass, field


@dataclass
class InvariantReport:
    """Named residuals checked against tolerances."""

    title: str
    entries: list = field(default_factory=list)
    params: dict = field(default_factory=dict)

    def add(self, name, residual, tol):
        residual = float(residual)
        self.entries.append(
            {"name": name, "residual": residual, "tol": float(tol),
             "passed": bool(residual <= tol)}
        )
        return self

    def add_margin(self, name, margin, minimum=0.0):
        """A quantity that must stay above a floor (e.g. boundary distances)."""
        margin = float(margin)
        self.entries.append(
            {"name": name, "residual": margin, "tol": float(minimum),
             "passed": bool(margin > minimum), "margin": True}
        )
        return self

    @property
    def ok(self):
        return all(e["passed"] for e in self.entries)

    def to_text(self):
        lines = [f"# {self.title}"]
        for key in self.params:
            lines.append(f"#   {key} = {self.params[key]}")
        for e in self.entries:
            word = "PASS" if e["passed"] else "FAIL"
            rel = ">" if e.get("margin") else "<="
            lines.append(
                f"{word} {e['name']}: {e['residual']:.6e} ({rel} {e['tol']:.1e})"
            )
        lines.append(("OK" if self.ok else "FAILED") + f" {self.title}")
        return "\n".join(lines)

    def to_json(self):
        return json.dumps(
            {"title": self.title, "params": self.params, "ok": self.ok,
             "checks": self.entries},
            indent=2, sort_keys=True,
        )
