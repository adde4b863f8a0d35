export { In, Out, defineModule, defaultRegistry, ModuleRegistry } from './dsl';
export type { InstanceRef, IntentContext, ModuleOptions, ModuleSpec, PortAnnotation } from './dsl';
export { elaborateSkeleton } from './skeleton';
export type { InstanceItemJson, ModuleSkeletonJson, Skeleton } from './skeleton';
export { Design } from './design';
export type { BuildOptions, BuildResult } from './design';
export { runCppl, runCpplChecked } from './compiler';
export type { CliResult, CompilerOptions } from './compiler';
export {
  CompilerError,
  CompilerMissingError,
  DuplicateModuleError,
  MissingAnnotationError,
  RefinementExhaustedError,
  UnknownModuleError,
} from './errors';
