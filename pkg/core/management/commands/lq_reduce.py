"""
Print the discrete quadruple (A_d, B_d, C_d, D_d) and the delay p(1) of a
boundary system as JSON.

Usage:
    python manage.py lq_reduce system.json
"""
from core import reports
from core.management.base import LQCommand


class Command(LQCommand):
    help = 'Reduce a boundary-controlled hyperbolic system to its discrete quadruple'

    def run(self, config, **options):
        quad = config.quadruple
        report = {
            'A_d': quad.A_d,
            'B_d': quad.B_d,
            'C_d': quad.C_d,
            'D_d': quad.D_d,
            'p1': config.profile.p1,
        }
        reports.write_json(self.stdout, report)
        self.status(f'Reduced n={quad.n}, inputs={quad.inputs}, outputs={quad.outputs}')
