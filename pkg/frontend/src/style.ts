/**
 * Fixed scheme -> colour/marker table so figures are comparable across
 * runs and machines.  Colours are the Okabe–Ito palette (distinguishable
 * under common colour-vision deficiencies); each scheme also gets a
 * distinct marker so curves survive greyscale printing.
 *
 * Detector identity is carried by the dash pattern: the exact detector
 * draws solid, approximations draw dashed, so a scheme keeps one colour
 * across its detector variants.
 */

export type Marker =
  | "circle"
  | "square"
  | "triangle"
  | "diamond"
  | "cross"
  | "plus"
  | "star";

export interface CurveStyle {
  color: string;
  marker: Marker;
}

export const SCHEME_STYLES: Readonly<Record<string, CurveStyle>> = {
  REF21_SVD_MMSE: { color: "#0072B2", marker: "circle" },
  REF29_CIA_BD: { color: "#D55E00", marker: "square" },
  M3_CIA_MMSE: { color: "#009E73", marker: "triangle" },
  P_CIA_STAR_MMSE_STAR: { color: "#CC79A7", marker: "diamond" },
  P_SVD_MMSE_STAR: { color: "#56B4E9", marker: "cross" },
  P_CIA_MMSE_STAR: { color: "#E69F00", marker: "plus" },
  P_SVD_STAR_MMSE_STAR: { color: "#000000", marker: "star" },
};

const FALLBACK: CurveStyle = { color: "#999999", marker: "circle" };

/** Style for a scheme; unknown schemes get a neutral fallback. */
export function styleFor(scheme: string): CurveStyle {
  return SCHEME_STYLES[scheme] ?? FALLBACK;
}

/** SVG stroke-dasharray per detector name ("-" = detector-less rows). */
export const DETECTOR_DASH: Readonly<Record<string, string>> = {
  "-": "",
  mdd: "",
  amdd: "7 3",
  nwmdd: "2 2",
  nwamdd: "7 3 2 3",
  nwimdd: "4 2",
};

export function dashFor(detector: string | null): string {
  return DETECTOR_DASH[detector ?? "-"] ?? "1 2";
}
