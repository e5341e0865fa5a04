/** Fixed 12-color class palette, identical to the server's label PNG palette.
 *  Class 0 (unlabeled/background) is black; classes cycle past 12. */

export const CLASS_PALETTE: [number, number, number][] = [
  [230, 25, 75],
  [60, 180, 75],
  [255, 225, 25],
  [0, 130, 200],
  [245, 130, 48],
  [145, 30, 180],
  [70, 240, 240],
  [240, 50, 230],
  [210, 245, 60],
  [250, 190, 212],
  [0, 128, 128],
  [220, 190, 255],
];

export function classColor(classId: number): [number, number, number] {
  if (classId === 0) return [0, 0, 0];
  return CLASS_PALETTE[(classId - 1) % CLASS_PALETTE.length];
}

export function classCss(classId: number): string {
  const [r, g, b] = classColor(classId);
  return `rgb(${r}, ${g}, ${b})`;
}
