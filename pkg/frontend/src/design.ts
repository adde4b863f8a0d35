// Design assembly: collect module specs, elaborate skeletons, refine each
// body through the compiler CLI, and compile the assembled design to
// Verilog.  Intermediate IR files are persisted in the working directory.

import * as fs from 'fs';
import * as os from 'os';
import * as path from 'path';

import { CompilerOptions, runCppl, runCpplChecked } from './compiler';
import { defaultRegistry, ModuleRegistry, ModuleSpec } from './dsl';
import { CompilerError, RefinementExhaustedError, UnknownModuleError } from './errors';
import { elaborateSkeleton, Skeleton } from './skeleton';

export interface BuildOptions extends CompilerOptions {
  /** Maximum refinement attempts per module (cppl refine --n-max). */
  nMax?: number;
  /** Generator command (exported as CPPL_GENERATOR_CMD for cppl refine). */
  generatorCmd?: string;
  /** Canned body items per module name; modules listed here skip the
   * generator entirely (test hook). */
  bodies?: Record<string, unknown[]>;
  /** Directory for intermediate artifacts (default: a fresh temp dir). */
  workDir?: string;
  /** Pass --no-opt to the final compile. */
  noOpt?: boolean;
}

export interface BuildResult {
  verilog: string;
  design: unknown[];
  workDir: string;
}

export class Design {
  private specs: ModuleSpec[] = [];

  constructor(private registry: ModuleRegistry = defaultRegistry) {}

  /** Add a module and, transitively, every module it instantiates. */
  add(spec: ModuleSpec | string): this {
    const resolved = typeof spec === 'string' ? this.registry.get(spec) : spec;
    if (!resolved) {
      throw new UnknownModuleError(`no registered module named ${String(spec)}`);
    }
    if (this.specs.some((s) => s.name === resolved.name)) {
      return this;
    }
    for (const ref of resolved.instances) {
      const callee = this.registry.get(ref.callee);
      if (!callee) {
        throw new UnknownModuleError(
          `${resolved.name} instantiates unregistered module ${ref.callee}`,
        );
      }
      this.add(callee);
    }
    this.specs.push(resolved);
    return this;
  }

  /** Callee-before-caller ordering (the instance graph is acyclic because
   * add() requires callees to exist before their callers register). */
  buildOrder(): ModuleSpec[] {
    return [...this.specs];
  }

  skeletons(): Map<string, Skeleton> {
    const out = new Map<string, Skeleton>();
    for (const spec of this.specs) {
      out.set(spec.name, elaborateSkeleton(spec, this.registry));
    }
    return out;
  }

  toVerilog(options: BuildOptions = {}): BuildResult {
    const workDir = options.workDir ?? fs.mkdtempSync(path.join(os.tmpdir(), 'cppl-build-'));
    fs.mkdirSync(workDir, { recursive: true });
    const context: unknown[] = [];

    for (const spec of this.buildOrder()) {
      const skeleton = elaborateSkeleton(spec, this.registry);
      const canned = options.bodies?.[spec.name];
      if (canned) {
        context.push({
          ...skeleton.module,
          body: [...skeleton.module.body, ...canned],
        });
        continue;
      }
      context.push(this.refineOne(spec.name, skeleton, context, workDir, options));
    }

    const designPath = path.join(workDir, 'design.json');
    fs.writeFileSync(designPath, JSON.stringify(context, null, 2));
    runCpplChecked(['check', designPath], options);

    const verilogPath = path.join(workDir, 'design.v');
    const compileArgs = ['compile', designPath, '-o', verilogPath];
    if (options.noOpt) {
      compileArgs.push('--no-opt');
    }
    runCpplChecked(compileArgs, options);
    return {
      verilog: fs.readFileSync(verilogPath, 'utf-8'),
      design: context,
      workDir,
    };
  }

  private refineOne(
    name: string,
    skeleton: Skeleton,
    context: unknown[],
    workDir: string,
    options: BuildOptions,
  ): unknown {
    const skeletonPath = path.join(workDir, `${name}.skeleton.json`);
    const contextPath = path.join(workDir, `${name}.context.json`);
    const intentPath = path.join(workDir, `${name}.intent.txt`);
    const irPath = path.join(workDir, `${name}.refined.json`);
    fs.writeFileSync(skeletonPath, JSON.stringify(skeleton.module, null, 2));
    fs.writeFileSync(contextPath, JSON.stringify(context, null, 2));
    fs.writeFileSync(intentPath, skeleton.intent);

    const env: Record<string, string> = { ...options.env };
    if (options.generatorCmd) {
      env.CPPL_GENERATOR_CMD = options.generatorCmd;
    }
    const result = runCppl(
      [
        'refine',
        skeletonPath,
        '--context',
        contextPath,
        '--intent',
        intentPath,
        '--n-max',
        String(options.nMax ?? 3),
        '--ir-out',
        irPath,
        '-o',
        path.join(workDir, `${name}.v`),
      ],
      { ...options, env },
    );
    if (result.code === 3) {
      let history: unknown[][] = [];
      try {
        history = JSON.parse(result.stdout);
      } catch {
        // leave empty when the CLI produced no history artifact
      }
      throw new RefinementExhaustedError(
        `refinement of ${name} exhausted its attempts`,
        history,
      );
    }
    if (result.code !== 0) {
      throw new CompilerError(
        `cppl refine ${name} exited ${result.code}: ${result.stderr.trim()}`,
        result.code,
      );
    }
    const refined = JSON.parse(fs.readFileSync(irPath, 'utf-8')) as Array<{ name: string }>;
    const moduleJson = refined.find((m) => m.name === name);
    if (!moduleJson) {
      throw new CompilerError(`refined design is missing module ${name}`, 1);
    }
    return moduleJson;
  }
}
