from georesilience.topology import DeploymentArea, generate_random_planar

AREA = DeploymentArea(1200.0, 1200.0)

# acceptance criterion -> (passed, detail); filled by test_acceptance
ACCEPTANCE = {}


def random_biconnected(n, m, seed):
    return generate_random_planar(n, m, AREA, seed, biconnected=True)


def simple_paths(adj, s, t, usable=lambda a, b: True):
    """Every simple s-t path by DFS (brute-force oracle)."""
    out = []

    def walk(path):
        u = path[-1]
        if u == t:
            out.append(tuple(path))
            return
        for v in adj[u]:
            if v not in path and usable(u, v):
                walk(path + [v])

    walk([s])
    return out


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
