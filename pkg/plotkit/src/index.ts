export { TraceFrame, Extent, parseTrace, dimExtent, timeExtent } from "./trace.js";
export { SplitTree, Leaf, parseSplits } from "./splits.js";
export { plotTube } from "./tube.js";
export { plotProjection } from "./projection.js";
export { plotTiling } from "./tiling.js";
