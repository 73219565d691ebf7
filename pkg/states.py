# states.py
# Default run state; helpers.load_config merges a JSON config over copies of these.

problem_state = {
    'data': {'kind': 'piecewise_constant', 'values': {'z1': 1.0}},   # hot top face
    'estimate_error': True,
}

collocation_state = {
    'n': 5,                 # points per face = n^2, N = 6 n^2
    'placement': 'uniform',
}

backend_state = {
    'name': 'mfs',
    'alpha': 3.0,
    'degree': 11,
    'n_cheb': 12,
    'condition': 'svd',
    'tsvd': False,
}

quadrature_state = {
    'base_k': 16,
    'rule': 'gauss',
    'telles': False,
}

output_state = {
    'BASE_DIR': 'runs',
    'CURRENT_DIR': '',
    'solution': 'solution.txt',
    'report': 'report.json',
    'collocation': 'collocation.csv',
}

run_state = {
    'threads': 1,
    'seed': 0,
}

corner_state = {
    'corner': (0.0, 0.0, 1.0),
    'distance': 0.0866,
    'resolution': 60,
}
