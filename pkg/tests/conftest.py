import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("pkg", deadline=None, max_examples=30,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("pkg")


@pytest.fixture(scope="session")
def models():
    from levy_passage.suites import standard_models
    return standard_models()


def pytest_terminal_summary(terminalreporter):
    lines = {}
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            props = dict(getattr(rep, "user_properties", []))
            key = props.get("criterion")
            if key is None:
                continue
            if rep.when == "call":
                word = "PASS" if outcome == "passed" else "FAIL"
                lines.setdefault(key, [word, rep.duration])[:] = [
                    "FAIL" if lines.get(key, [""])[0] == "FAIL" else word, rep.duration]
            elif outcome == "error":
                # setup failure or runtime budget exceeded
                lines.setdefault(key, ["FAIL", 0.0])[0] = "FAIL"
    lines = {k: f"{w} criterion {k} ({d:.1f}s)" for k, (w, d) in lines.items()}
    if lines:
        terminalreporter.section("acceptance criteria")
        for key in sorted(lines):
            terminalreporter.write_line(lines[key])
