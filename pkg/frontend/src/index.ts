export {
  COLUMNS,
  CSV_HEADER,
  parseResultsCsv,
  SchemaError,
  type ResultRow,
} from "./csv.js";
export {
  filterRows,
  parseFigureSpec,
  SpecError,
  type FigureFilter,
  type FigureKind,
  type FigureSpec,
} from "./spec.js";
export {
  dashFor,
  DETECTOR_DASH,
  SCHEME_STYLES,
  styleFor,
  type CurveStyle,
  type Marker,
} from "./style.js";
export { NoDataError, renderFigure, stripMetadata } from "./render.js";
