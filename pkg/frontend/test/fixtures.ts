// Shared module definitions: the two-module adder/ALU design used across
// the frontend tests.

import { In, ModuleRegistry, ModuleSpec, Out } from '../src/index';

export interface AluFixture {
  registry: ModuleRegistry;
  Adder8: ModuleSpec;
  ALU: ModuleSpec;
}

export function defineAluDesign(): AluFixture {
  const registry = new ModuleRegistry();

  const Adder8 = registry.define({
    name: 'Adder8',
    ports: { a: In(8), b: In(8), sum: Out(8) },
    intent: 'out equals a plus b (8-bit addition).',
  });

  const ALU = registry.define({
    name: 'ALU',
    ports: { op_code: In(2), op_a: In(8), op_b: In(8), res: Out(8), zero: Out(1) },
    intent: (ctx) => `
      Simple ALU that uses an Adder8 instance for addition.
      Based on op_code (2-bit selector):
      - 00: res = ${ctx.instance(Adder8, { a: 'op_a', b: 'op_b' }).sum} (result from Adder8 instance)
      - 01: res = op_a - op_b
      - 10: res = op_a & op_b (bitwise AND)
      - 11: res = op_a | op_b (bitwise OR)
      zero is 1 when res equals 0, otherwise 0.
    `,
  });

  return { registry, Adder8, ALU };
}

export const CANNED_BODIES: Record<string, unknown[]> = {
  Adder8: [
    { id: 'sum_val', op: 'add', args: ['a', 'b'] },
    { op: 'output', args: { sum: 'sum_val' } },
  ],
  ALU: [
    { id: 'sel0', op: 'extract', args: ['op_code'], lowBit: 0, width: 1 },
    { id: 'sel1', op: 'extract', args: ['op_code'], lowBit: 1, width: 1 },
    { id: 'sub_res', op: 'sub', args: ['op_a', 'op_b'] },
    { id: 'and_res', op: 'and', args: ['op_a', 'op_b'] },
    { id: 'or_res', op: 'or', args: ['op_a', 'op_b'] },
    { id: 'mux_lo', op: 'mux', args: ['sel0', 'sub_res', 'adder8_sum'] },
    { id: 'mux_hi', op: 'mux', args: ['sel0', 'or_res', 'and_res'] },
    { id: 'res_mux', op: 'mux', args: ['sel1', 'mux_hi', 'mux_lo'] },
    { id: 'any_set', op: 'or_reduce', args: ['res_mux'] },
    { id: 'is_zero', op: 'not', args: ['any_set'] },
    { op: 'output', args: { res: 'res_mux', zero: 'is_zero' } },
  ],
};

export function aluOracle(opCode: number, a: number, b: number): [number, number] {
  let res: number;
  if (opCode === 0) {
    res = (a + b) & 0xff;
  } else if (opCode === 1) {
    res = (a - b) & 0xff;
  } else if (opCode === 2) {
    res = a & b;
  } else {
    res = a | b;
  }
  return [res, res === 0 ? 1 : 0];
}
