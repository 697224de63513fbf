/**
 * Orbit camera with a simple pinhole projection, z-up world. State
 * persists across frames; only explicit orbit/pan/zoom calls move it.
 */

export class OrbitCamera {
  yaw = Math.PI / 4;       // around world +z
  pitch = Math.PI / 5;     // elevation above the xy plane
  distance = 40;
  target: [number, number, number] = [0, 0, 0];
  focal = 600;             // pixels

  orbit(dxRad: number, dyRad: number): void {
    this.yaw += dxRad;
    const limit = Math.PI / 2 - 0.01;
    this.pitch = Math.min(limit, Math.max(-limit, this.pitch + dyRad));
  }

  zoom(factor: number): void {
    this.distance = Math.min(500, Math.max(0.5, this.distance * factor));
  }

  pan(dxWorld: number, dyWorld: number): void {
    // Move the target in the camera's screen plane.
    const [rx, ry] = this.rightVector();
    const [ux, uy, uz] = this.upVector();
    this.target = [
      this.target[0] + rx * dxWorld + ux * dyWorld,
      this.target[1] + ry * dxWorld + uy * dyWorld,
      this.target[2] + uz * dyWorld,
    ];
  }

  eye(): [number, number, number] {
    const ch = Math.cos(this.pitch);
    return [
      this.target[0] + this.distance * ch * Math.cos(this.yaw),
      this.target[1] + this.distance * ch * Math.sin(this.yaw),
      this.target[2] + this.distance * Math.sin(this.pitch),
    ];
  }

  private forwardVector(): [number, number, number] {
    const [ex, ey, ez] = this.eye();
    const f: [number, number, number] = [
      this.target[0] - ex, this.target[1] - ey, this.target[2] - ez,
    ];
    const n = Math.hypot(...f);
    return [f[0] / n, f[1] / n, f[2] / n];
  }

  private rightVector(): [number, number] {
    // Horizontal right vector (cross of forward with world up, z).
    const [fx, fy] = this.forwardVector();
    const n = Math.hypot(fx, fy) || 1;
    return [fy / n, -fx / n];
  }

  private upVector(): [number, number, number] {
    const f = this.forwardVector();
    const [rx, ry] = this.rightVector();
    // up = right x forward
    return [
      ry * f[2] - 0 * f[1],
      0 * f[0] - rx * f[2],
      rx * f[1] - ry * f[0],
    ];
  }

  /**
   * Project one world point; returns [sx, sy, depth] with depth > 0 in
   * front of the camera, in pixels around (width/2, height/2).
   */
  projectPoint(
    x: number, y: number, z: number, width: number, height: number,
  ): [number, number, number] {
    const [ex, ey, ez] = this.eye();
    const f = this.forwardVector();
    const [rx, ry] = this.rightVector();
    const u = this.upVector();
    const dx = x - ex, dy = y - ey, dz = z - ez;
    const depth = dx * f[0] + dy * f[1] + dz * f[2];
    const cx = dx * rx + dy * ry;
    const cy = dx * u[0] + dy * u[1] + dz * u[2];
    return [
      width / 2 + (this.focal * cx) / depth,
      height / 2 - (this.focal * cy) / depth,
      depth,
    ];
  }

  /**
   * Project an interleaved xyz buffer straight from the wire; output is
   * interleaved [sx, sy, depth]. No JSON numbers anywhere on this path.
   */
  projectAll(points: Float32Array, width: number, height: number): Float32Array {
    const n = Math.floor(points.length / 3);
    const out = new Float32Array(n * 3);
    for (let i = 0; i < n; i++) {
      const [sx, sy, depth] = this.projectPoint(
        points[3 * i], points[3 * i + 1], points[3 * i + 2], width, height,
      );
      out[3 * i] = sx;
      out[3 * i + 1] = sy;
      out[3 * i + 2] = depth;
    }
    return out;
  }
}
