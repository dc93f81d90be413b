/** Binary STL decoding for the meshes the pipeline service returns. */

export interface DecodedMesh {
  triangleCount: number;
  /** 9 floats per triangle (three vertices), mm. */
  positions: Float32Array;
  /** 3 floats per triangle (the facet normal). */
  normals: Float32Array;
}

const HEADER_BYTES = 80;
const TRIANGLE_BYTES = 50; // 12 float32 + uint16 attribute

export function decodeBinaryStl(buffer: ArrayBuffer): DecodedMesh {
  if (buffer.byteLength < HEADER_BYTES + 4) {
    throw new Error(`STL truncated: ${buffer.byteLength} bytes`);
  }
  const view = new DataView(buffer);
  const triangleCount = view.getUint32(HEADER_BYTES, true);
  const expected = HEADER_BYTES + 4 + triangleCount * TRIANGLE_BYTES;
  if (buffer.byteLength !== expected) {
    throw new Error(
      `STL length ${buffer.byteLength} != ${expected} for ${triangleCount} triangles`,
    );
  }
  const positions = new Float32Array(triangleCount * 9);
  const normals = new Float32Array(triangleCount * 3);
  let offset = HEADER_BYTES + 4;
  for (let t = 0; t < triangleCount; t++) {
    for (let c = 0; c < 3; c++) {
      normals[t * 3 + c] = view.getFloat32(offset, true);
      offset += 4;
    }
    for (let c = 0; c < 9; c++) {
      positions[t * 9 + c] = view.getFloat32(offset, true);
      offset += 4;
    }
    offset += 2; // attribute byte count, unused
  }
  return { triangleCount, positions, normals };
}

/** Decode the base64 payload of a mesh entry into triangle arrays. */
export function decodeMeshPayload(data: string): DecodedMesh {
  const bytes = base64ToBytes(data);
  const buffer = new ArrayBuffer(bytes.byteLength);
  new Uint8Array(buffer).set(bytes);
  return decodeBinaryStl(buffer);
}

function base64ToBytes(data: string): Uint8Array {
  // atob exists in browsers and node >= 16; Buffer also works under node.
  if (typeof atob === 'function') {
    const text = atob(data);
    const out = new Uint8Array(text.length);
    for (let i = 0; i < text.length; i++) out[i] = text.charCodeAt(i);
    return out;
  }
  return Uint8Array.from(Buffer.from(data, 'base64'));
}
