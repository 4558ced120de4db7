"""
Instance Files
Plain-text dump of a rendezvous routing instance for offline solver runs:

    robots <n>
    nodes <size>
    node <index> <robot|svp> <x> <y> <z>
    ...
    matrix
    <size rows of size costs>
"""

import numpy as np

from apps.core.exceptions import ScenarioError
from .cost import ROBOT, CostMatrix


def dump_instance(cost, path):
    lines = [f'robots {cost.n_robots}', f'nodes {cost.size}']
    for node, position in enumerate(cost.positions):
        x, y, z = (float(v) for v in position)
        lines.append(f'node {node} {cost.kind(node)} {x!r} {y!r} {z!r}')
    lines.append('matrix')
    for row in cost.d:
        lines.append(' '.join(repr(float(v)) for v in row))
    with open(path, 'w') as handle:
        handle.write('\n'.join(lines) + '\n')


def load_instance(path):
    with open(path) as handle:
        lines = [line.strip() for line in handle if line.strip() and not line.startswith('#')]
    try:
        n_robots = int(lines[0].split()[1])
        size = int(lines[1].split()[1])
        positions = np.zeros((size, 3))
        kinds = []
        for line in lines[2:2 + size]:
            _, index, kind, x, y, z = line.split()
            positions[int(index)] = (float(x), float(y), float(z))
            kinds.append(kind)
        if lines[2 + size] != 'matrix':
            raise ValueError('missing matrix section')
        d = np.array([[float(v) for v in line.split()] for line in lines[3 + size:3 + 2 * size]])
    except (IndexError, ValueError) as exc:
        raise ScenarioError(f'Malformed instance file {path}: {exc}')
    if d.shape != (size, size):
        raise ScenarioError(f'Instance matrix is {d.shape}, expected {(size, size)}.')
    if kinds[:n_robots] != [ROBOT] * n_robots:
        raise ScenarioError('Robot nodes must come first.')
    return CostMatrix(d=d, positions=positions, n_robots=n_robots)
