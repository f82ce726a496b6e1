from .commands import (RunConfig, cmd_plan, cmd_run, cmd_quant_sweep, cmd_oracle, exit_code_for, EXIT_OK, EXIT_USAGE,
                       EXIT_INFEASIBLE, EXIT_VERIFY, EXIT_OVERFLOW)

__all__ = ['RunConfig', 'cmd_plan', 'cmd_run', 'cmd_quant_sweep', 'cmd_oracle', 'exit_code_for', 'EXIT_OK',
           'EXIT_USAGE', 'EXIT_INFEASIBLE', 'EXIT_VERIFY', 'EXIT_OVERFLOW']
