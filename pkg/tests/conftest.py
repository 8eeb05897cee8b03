import pytest


@pytest.fixture
def acceptance_report(request):
    """Emit one PASS/FAIL line per acceptance criterion on the real terminal.

    Writes through pytest's terminal reporter so the line survives output
    capture; falls back to print when the plugin is absent.
    """
    reporter = request.config.pluginmanager.get_plugin("terminalreporter")

    def _report(number: int, description: str, passed: bool, detail: str = ""):
        status = "PASS" if passed else "FAIL"
        suffix = f" ({detail})" if detail else ""
        line = f"ACCEPTANCE {number:2d} {status}  {description}{suffix}"
        if reporter is not None:
            reporter.write_line("")
            reporter.write_line(line)
        else:
            print(line)
        assert passed, f"criterion {number} failed: {description}{suffix}"

    return _report
