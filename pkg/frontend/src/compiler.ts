// Subprocess bridge to the cppl CLI.

import { spawnSync } from 'child_process';
import { CompilerError, CompilerMissingError } from './errors';

export interface CompilerOptions {
  /** Compiler executable; defaults to $CPPL_BIN or "cppl" on PATH. */
  bin?: string;
  env?: Record<string, string>;
  cwd?: string;
}

export interface CliResult {
  code: number;
  stdout: string;
  stderr: string;
}

export function runCppl(args: string[], options: CompilerOptions = {}): CliResult {
  const bin = options.bin ?? process.env.CPPL_BIN ?? 'cppl';
  const proc = spawnSync(bin, args, {
    encoding: 'utf-8',
    cwd: options.cwd,
    env: { ...process.env, ...options.env },
    maxBuffer: 64 * 1024 * 1024,
  });
  if (proc.error) {
    throw new CompilerMissingError(`cannot run ${bin}: ${proc.error.message}`);
  }
  return { code: proc.status ?? -1, stdout: proc.stdout, stderr: proc.stderr };
}

/** Run and require exit 0; non-zero exits become CompilerError with any
 * diagnostics JSON the CLI printed attached. */
export function runCpplChecked(args: string[], options: CompilerOptions = {}): CliResult {
  const result = runCppl(args, options);
  if (result.code !== 0) {
    let diagnostics: unknown;
    try {
      diagnostics = JSON.parse(result.stdout);
    } catch {
      diagnostics = undefined;
    }
    throw new CompilerError(
      `cppl ${args[0]} exited ${result.code}: ${result.stderr.trim()}`,
      result.code,
      diagnostics,
    );
  }
  return result;
}
