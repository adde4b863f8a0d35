// Deterministic elaboration of a ModuleSpec into an IR module skeleton:
// the port map plus one pre-inserted instance item per instance call, with
// intent placeholders rewritten to the chosen result ids.

import { InstanceRef, ModuleRegistry, ModuleSpec } from './dsl';
import { UnknownModuleError } from './errors';

export interface InstanceItemJson {
  id: string[];
  op: 'instance';
  module: string;
  args: Record<string, string>;
}

export interface ModuleSkeletonJson {
  name: string;
  ports: Record<string, { dir: 'input' | 'output'; width: number }>;
  body: InstanceItemJson[];
}

export interface Skeleton {
  module: ModuleSkeletonJson;
  intent: string;
}

function resultId(callee: string, port: string, ordinal: number, taken: Set<string>): string {
  const base = `${callee.toLowerCase()}_${port}`;
  let candidate = base;
  let k = ordinal;
  while (taken.has(candidate)) {
    candidate = `${base}_${k}`;
    k += 1;
  }
  taken.add(candidate);
  return candidate;
}

export function elaborateSkeleton(spec: ModuleSpec, registry: ModuleRegistry): Skeleton {
  const ports: ModuleSkeletonJson['ports'] = {};
  const taken = new Set<string>();
  for (const [port, width] of spec.inputs) {
    ports[port] = { dir: 'input', width };
    taken.add(port);
  }
  for (const [port, width] of spec.outputs) {
    ports[port] = { dir: 'output', width };
    taken.add(port);
  }

  let intent = spec.intent;
  const body: InstanceItemJson[] = [];
  for (const ref of spec.instances) {
    const callee = registry.get(ref.callee);
    if (!callee) {
      throw new UnknownModuleError(
        `${spec.name} instantiates unregistered module ${ref.callee}`,
      );
    }
    const ids: string[] = [];
    for (const [port] of callee.outputs) {
      const rid = resultId(ref.callee, port, ref.ordinal, taken);
      ids.push(rid);
      const token = ref.placeholders[port] ?? `{{inst:${ref.callee}#${ref.ordinal}.${port}}}`;
      intent = intent.split(token).join(rid);
    }
    body.push({ id: ids, op: 'instance', module: ref.callee, args: { ...ref.bindings } });
  }
  return { module: { name: spec.name, ports, body }, intent };
}
