"""
Shared plumbing for the lq_* management commands: the positional config
argument, config loading, and the exit-code contract
(0 ok, 1 validation, 2 convergence, 3 stability).
"""
import logging

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from core.exceptions import HyperLQError
from core.forms import load_config

logger = logging.getLogger(__name__)


class LQCommand(BaseCommand):
    requires_system_checks = []

    def add_arguments(self, parser):
        parser.add_argument('config', help='Path to the JSON system description')

    def handle(self, *args, **options):
        try:
            config = load_config(options['config'], settings.HYPERLQ_GRID_POINTS)
            return self.run(**{**options, 'config': config})
        except HyperLQError as exc:
            logger.debug(f"{self.__module__} failed with {type(exc).__name__}")
            raise CommandError(str(exc), returncode=exc.exit_code) from exc

    def run(self, config, **options):
        raise NotImplementedError('subclasses of LQCommand must provide a run() method')

    def add_solver_arguments(self, parser):
        parser.add_argument(
            '--tol',
            type=float,
            default=settings.HYPERLQ_CARE_TOL,
            help='Relative step tolerance of the Riccati value iteration',
        )
        parser.add_argument(
            '--max-iter',
            type=int,
            default=settings.HYPERLQ_MAX_ITER,
            help='Iteration budget of the Riccati value iteration',
        )

    @property
    def threads(self):
        return settings.HYPERLQ_THREADS

    def status(self, message, style='SUCCESS'):
        """Status lines go to stderr so stdout stays machine-readable."""
        self.stderr.write(getattr(self.style, style)(message))
