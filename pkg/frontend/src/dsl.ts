// Module declaration DSL: width-typed ports, free-form intent text, and
// instance calls that embed stable placeholder tokens into the intent.

import { DuplicateModuleError, MissingAnnotationError } from './errors';

export interface PortAnnotation {
  dir: 'input' | 'output';
  width: number;
}

export function In(width: number): PortAnnotation {
  return { dir: 'input', width };
}

export function Out(width: number): PortAnnotation {
  return { dir: 'output', width };
}

export interface InstanceRef {
  callee: string;
  ordinal: number;
  bindings: Record<string, string>;
  /** callee output port -> placeholder token embedded in the intent */
  placeholders: Record<string, string>;
}

export interface ModuleSpec {
  name: string;
  inputs: Array<[string, number]>;
  outputs: Array<[string, number]>;
  intent: string;
  instances: InstanceRef[];
}

export interface IntentContext {
  /** Instantiate a registered module inside the intent text.  Returns the
   * placeholder tokens for the callee's output ports, so the result can be
   * interpolated directly into the template literal. */
  instance(
    callee: ModuleSpec | string,
    bindings: Record<string, string>,
  ): Record<string, string>;
}

export interface ModuleOptions {
  name: string;
  ports: Record<string, PortAnnotation>;
  intent?: string | ((ctx: IntentContext) => string);
}

export class ModuleRegistry {
  private specs = new Map<string, ModuleSpec>();

  define(options: ModuleOptions): ModuleSpec {
    const { name, ports } = options;
    if (this.specs.has(name)) {
      throw new DuplicateModuleError(`module ${name} is already defined`);
    }
    const inputs: Array<[string, number]> = [];
    const outputs: Array<[string, number]> = [];
    for (const [port, ann] of Object.entries(ports)) {
      if (!ann || typeof ann.width !== 'number' || !Number.isInteger(ann.width) || ann.width < 1) {
        throw new MissingAnnotationError(
          `port ${name}.${port} needs an In/Out annotation with a positive width`,
        );
      }
      (ann.dir === 'input' ? inputs : outputs).push([port, ann.width]);
    }

    const instances: InstanceRef[] = [];
    const perCallee = new Map<string, number>();
    const ctx: IntentContext = {
      instance: (callee, bindings) => {
        const calleeName = typeof callee === 'string' ? callee : callee.name;
        const ordinal = perCallee.get(calleeName) ?? 0;
        perCallee.set(calleeName, ordinal + 1);
        const calleeSpec = typeof callee === 'string' ? this.specs.get(callee) : callee;
        const outPorts = calleeSpec ? calleeSpec.outputs.map(([p]) => p) : [];
        const placeholders: Record<string, string> = {};
        for (const port of outPorts) {
          placeholders[port] = `{{inst:${calleeName}#${ordinal}.${port}}}`;
        }
        instances.push({ callee: calleeName, ordinal, bindings: { ...bindings }, placeholders });
        return placeholders;
      },
    };

    const rawIntent = options.intent ?? '';
    const intent = typeof rawIntent === 'function' ? rawIntent(ctx) : rawIntent;

    const spec: ModuleSpec = { name, inputs, outputs, intent, instances };
    this.specs.set(name, spec);
    return spec;
  }

  get(name: string): ModuleSpec | undefined {
    return this.specs.get(name);
  }

  has(name: string): boolean {
    return this.specs.has(name);
  }
}

export const defaultRegistry = new ModuleRegistry();

export function defineModule(
  options: ModuleOptions,
  registry: ModuleRegistry = defaultRegistry,
): ModuleSpec {
  return registry.define(options);
}
