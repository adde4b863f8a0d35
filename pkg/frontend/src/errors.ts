export class MissingAnnotationError extends Error {}

export class DuplicateModuleError extends Error {}

export class UnknownModuleError extends Error {}

/** The compiler CLI exited non-zero; carries its exit code and, when the
 * CLI printed a diagnostics JSON artifact, the parsed diagnostics. */
export class CompilerError extends Error {
  constructor(
    message: string,
    public readonly exitCode: number,
    public readonly diagnostics: unknown = undefined,
  ) {
    super(message);
  }
}

/** The refinement loop used up every attempt; carries one diagnostics
 * list per failed attempt. */
export class RefinementExhaustedError extends CompilerError {
  constructor(message: string, public readonly history: unknown[][]) {
    super(message, 3, history);
  }
}

/** The compiler binary could not be spawned at all. */
export class CompilerMissingError extends Error {}
