"""Seeded demo/test corpora.

``write_vulnerable_corpus`` plants exactly one violation per minilint rule
across six Java files (five findings total, one file clean).
``write_clone_corpus`` plants one cross-file duplicated function, renamed
identifiers and all, inside a five-file corpus.
"""

from __future__ import annotations

import json
from pathlib import Path

VULNERABLE_FINDING_COUNT = 5

_VULNERABLE_FILES = {
    "Credentials.java": """\
package fixture;

public class Credentials {
    public String connect() {
        String password = "hunter2";
        return "db://user:" + password;
    }
}
""",
    "UserQuery.java": """\
package fixture;

public class UserQuery {
    public String byId(int id) {
        return "SELECT name FROM users WHERE id = " + id;
    }
}
""",
    "TokenSource.java": """\
package fixture;

import java.util.Random;

public class TokenSource {
    public int next() {
        Random source = new Random();
        return source.nextInt(9999);
    }
}
""",
    "Worker.java": """\
package fixture;

public class Worker {
    public void run(Runnable task) {
        try {
            task.run();
        } catch (RuntimeException e) {}
    }
}
""",
    "Reporter.java": """\
package fixture;

public class Reporter {
    public void report(Exception e) {
        e.printStackTrace();
    }
}
""",
    "Hello.java": """\
package fixture;

public class Hello {
    public String greet() {
        return "Hello world";
    }
}
""",
}

_CLEAN_FILES = {
    "Hello.java": """\
package fixture;

public class Hello {
    public String greet() {
        return "Hello world";
    }
}
""",
    "Adder.java": """\
package fixture;

public class Adder {
    public int add(int a, int b) {
        return a + b;
    }
}
""",
    "Farewell.java": """\
package fixture;

public class Farewell {
    public String wave() {
        return "Bye now";
    }
}
""",
}

# The planted duplicate: same structure in both files, identifiers renamed.
_CLONE_FILES = {
    "ReportTotals.java": """\
package fixture;

public class ReportTotals {
    private int rows;

    public void bump() {
        rows = rows + 1;
    }

    public int accumulate(int[] values) {
        int total = 0;
        for (int i = 0; i < values.length; i++) {
            int current = values[i];
            if (current > 0) {
                total = total + current;
            } else {
                total = total - current;
            }
        }
        return total;
    }

    public int rowCount() {
        return rows;
    }
}
""",
    "MetricsMerge.java": """\
package fixture;

public class MetricsMerge {
    private String label;
    private long stamp;

    public void tag(String name) {
        label = name;
        stamp = 0;
    }

    public int combine(int[] samples) {
        int sum = 0;
        for (int k = 0; k < samples.length; k++) {
            int item = samples[k];
            if (item > 0) {
                sum = sum + item;
            } else {
                sum = sum - item;
            }
        }
        return sum;
    }

    public String tagName() {
        return label;
    }
}
""",
    "Greeting.java": """\
package fixture;

public class Greeting {
    public String hello(String name) {
        return "Hi, " + name;
    }
}
""",
    "Box.java": """\
package fixture;

public class Box {
    private double weight;

    public double heavier(double extra) {
        weight += extra;
        return weight;
    }
}
""",
    "Together.java": """\
package fixture;

public class Together {
    public String join(String a, String b, String sep) {
        return a + sep + b;
    }
}
""",
}


def _write_tree(root: Path, files: dict[str, str]) -> Path:
    root = Path(root)
    (root / "src").mkdir(parents=True, exist_ok=True)
    for name, content in files.items():
        (root / "src" / name).write_text(content, encoding="utf-8")
    return root


def write_vulnerable_corpus(root: str | Path) -> Path:
    """Six files, exactly five minilint findings (one per rule)."""
    return _write_tree(Path(root), _VULNERABLE_FILES)


def write_clean_corpus(root: str | Path) -> Path:
    return _write_tree(Path(root), _CLEAN_FILES)


def write_clone_corpus(root: str | Path) -> Path:
    """Five files with one planted cross-file clone (renamed identifiers)."""
    return _write_tree(Path(root), _CLONE_FILES)


def write_probe_fixture(
    path: str | Path,
    *,
    frontmost: str = "idea",
    apps: tuple[str, ...] = ("Google Chrome", "Terminal", "idea"),
    tabs: tuple[str, ...] = ("https://github.com/owasp/webgoat",),
) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        json.dumps(
            {
                "open_applications": list(apps),
                "frontmost": frontmost,
                "browser_tabs": list(tabs),
            },
            indent=2,
        )
        + "\n",
        encoding="utf-8",
    )
    return path
