/** Lat/lon <-> screen mapping for the SVG map, plus slippy-tile math for
 * the optional basemap. Equirectangular with a cos(center-lat) aspect
 * correction, which is plenty at city scale.
 */
import { BBoxObj } from "./types.js";

export interface MapTransform {
  width: number;
  height: number;
  bbox: BBoxObj;
  toXY(lat: number, lon: number): [number, number];
  toLatLon(x: number, y: number): [number, number];
}

export function fitBounds(
  bbox: BBoxObj,
  width: number,
  height: number,
  padPx = 10,
): MapTransform {
  const centerLat = (bbox.min_lat + bbox.max_lat) / 2;
  const cos = Math.max(Math.cos((centerLat * Math.PI) / 180), 1e-6);
  const spanLon = Math.max(bbox.max_lon - bbox.min_lon, 1e-9) * cos;
  const spanLat = Math.max(bbox.max_lat - bbox.min_lat, 1e-9);
  const innerW = width - 2 * padPx;
  const innerH = height - 2 * padPx;
  const scale = Math.min(innerW / spanLon, innerH / spanLat);
  const offsetX = padPx + (innerW - spanLon * scale) / 2;
  const offsetY = padPx + (innerH - spanLat * scale) / 2;

  return {
    width,
    height,
    bbox,
    toXY(lat: number, lon: number): [number, number] {
      const x = offsetX + (lon - bbox.min_lon) * cos * scale;
      const y = offsetY + (bbox.max_lat - lat) * scale;
      return [x, y];
    },
    toLatLon(x: number, y: number): [number, number] {
      const lon = bbox.min_lon + (x - offsetX) / (cos * scale);
      const lat = bbox.max_lat - (y - offsetY) / scale;
      return [lat, lon];
    },
  };
}

// --- slippy tiles -------------------------------------------------------------

export interface TileRef {
  z: number;
  x: number;
  y: number;
}

export function lonLatToTile(lat: number, lon: number, z: number): TileRef {
  const n = 2 ** z;
  const x = Math.floor(((lon + 180) / 360) * n);
  const latRad = (lat * Math.PI) / 180;
  const y = Math.floor(
    ((1 - Math.log(Math.tan(latRad) + 1 / Math.cos(latRad)) / Math.PI) / 2) * n,
  );
  return { z, x: Math.min(Math.max(x, 0), n - 1), y: Math.min(Math.max(y, 0), n - 1) };
}

/** Zoom level at which the bbox spans roughly the given pixel width. */
export function zoomForBBox(bbox: BBoxObj, widthPx: number, tileSize = 256): number {
  const spanLon = Math.max(bbox.max_lon - bbox.min_lon, 1e-9);
  const z = Math.log2((360 * widthPx) / (spanLon * tileSize));
  return Math.min(Math.max(Math.floor(z), 0), 19);
}

export function tilesForBBox(bbox: BBoxObj, z: number): TileRef[] {
  const a = lonLatToTile(bbox.max_lat, bbox.min_lon, z);
  const b = lonLatToTile(bbox.min_lat, bbox.max_lon, z);
  const tiles: TileRef[] = [];
  for (let x = a.x; x <= b.x; x++) {
    for (let y = a.y; y <= b.y; y++) {
      tiles.push({ z, x, y });
    }
  }
  return tiles;
}

export function tileUrl(template: string, tile: TileRef): string {
  return template
    .replace("{z}", String(tile.z))
    .replace("{x}", String(tile.x))
    .replace("{y}", String(tile.y));
}
