import * as THREE from 'three';
import { OrbitControls } from 'three/addons/controls/OrbitControls.js';
import { bannerFromOutcome, BannerModel } from './banner';
import { PipelineClient, submitSketch } from './client';
import { SketchDocument } from './document';
import { buildQuadruped, buildThinLimb, Sketch } from './fixtures';
import { buildGauges } from './gauges';
import { History } from './history';
import { buildViewportScene } from './render';
import { paint, PaintTool, placeJoint, removeJoint } from './tools';
import { Material, ScorePayload, Vec3 } from './types';

type Tool = PaintTool | 'joint';

const CELL_PX = 14;
const MATERIAL_FILL: Record<number, string> = {
  [Material.Rigid]: '#8899aa',
  [Material.Soft]: '#55aa77',
};

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text = '',
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  if (text) node.textContent = text;
  return node;
}

/**
 * The studio: a layer-slice painter on the left, an orbitable 3D view in
 * the middle, and the score/failure panel on the right. All solver work
 * happens on the pipeline service; this class only edits and displays.
 */
export class StudioApp {
  doc: SketchDocument;
  history: History;
  tool: Tool = 'box-fill';
  material: Material = Material.Rigid;
  layer = 0;
  brushRadius = 2;

  private slice!: HTMLCanvasElement;
  private layerInput!: HTMLInputElement;
  private layerLabel!: HTMLSpanElement;
  private submitButton!: HTMLButtonElement;
  private undoButton!: HTMLButtonElement;
  private redoButton!: HTMLButtonElement;
  private toolButtons = new Map<Tool, HTMLButtonElement>();
  private bannerBox!: HTMLDivElement;
  private gaugeBox!: HTMLDivElement;

  private scene = new THREE.Scene();
  private camera: THREE.PerspectiveCamera;
  private renderer: THREE.WebGLRenderer;
  private controls: OrbitControls;
  private sketchGroup = new THREE.Group();
  private blueprintGroup: THREE.Group | null = null;

  private dragStart: Vec3 | null = null;

  constructor(
    root: HTMLElement,
    private client: PipelineClient,
  ) {
    const seed = buildQuadruped();
    this.doc = seed.doc;
    this.history = seed.history;

    root.replaceChildren(this.buildToolbar(), this.buildBody());

    this.camera = new THREE.PerspectiveCamera(50, 1, 1, 2000);
    this.renderer = new THREE.WebGLRenderer({ antialias: true });
    const viewport = root.querySelector('section.viewport') as HTMLElement;
    viewport.appendChild(this.renderer.domElement);
    this.controls = new OrbitControls(this.camera, this.renderer.domElement);
    this.controls.enableDamping = true;
    this.scene.background = new THREE.Color(0x10131a);
    this.scene.add(new THREE.AmbientLight(0xffffff, 0.7));
    const sun = new THREE.DirectionalLight(0xffffff, 1.2);
    sun.position.set(1, 0.6, 1.4);
    this.scene.add(sun, this.sketchGroup);

    const resize = () => {
      const w = viewport.clientWidth || 640;
      const h = viewport.clientHeight || 480;
      this.renderer.setSize(w, h);
      this.camera.aspect = w / h;
      this.camera.updateProjectionMatrix();
    };
    window.addEventListener('resize', resize);
    resize();
    this.frameCamera();

    window.addEventListener('keydown', (ev) => {
      if ((ev.ctrlKey || ev.metaKey) && ev.key.toLowerCase() === 'z') {
        ev.preventDefault();
        if (ev.shiftKey) this.redo();
        else this.undo();
      }
    });

    this.resetForDocument();
    const animate = () => {
      requestAnimationFrame(animate);
      this.controls.update();
      this.renderer.render(this.scene, this.camera);
    };
    animate();
  }

  // --- construction --------------------------------------------------------

  private buildToolbar(): HTMLElement {
    const bar = el('header', { class: 'toolbar' });
    bar.appendChild(el('h1', {}, 'sketch-studio'));

    const tools = el('div', { class: 'group' });
    const toolDefs: Array<[Tool, string]> = [
      ['brush', 'Brush'],
      ['box-fill', 'Box fill'],
      ['erase', 'Erase'],
      ['joint', 'Joint'],
    ];
    for (const [tool, label] of toolDefs) {
      const b = el('button', {}, label);
      b.addEventListener('click', () => this.setTool(tool));
      this.toolButtons.set(tool, b);
      tools.appendChild(b);
    }
    bar.appendChild(tools);

    const materials = el('div', { class: 'group' });
    materials.appendChild(el('label', {}, 'material'));
    const select = el('select');
    select.append(
      new Option('rigid', String(Material.Rigid), true, true),
      new Option('soft', String(Material.Soft)),
    );
    select.addEventListener('change', () => {
      this.material = Number(select.value) as Material;
    });
    materials.appendChild(select);
    bar.appendChild(materials);

    const layer = el('div', { class: 'group' });
    layer.appendChild(el('label', {}, 'layer'));
    this.layerInput = el('input', {
      type: 'range',
      min: '0',
      value: '0',
    }) as HTMLInputElement;
    this.layerInput.addEventListener('input', () => {
      this.layer = Number(this.layerInput.value);
      this.refreshSlice();
    });
    this.layerLabel = el('span', {}, 'z=0');
    layer.append(this.layerInput, this.layerLabel);
    bar.appendChild(layer);

    const historyGroup = el('div', { class: 'group' });
    this.undoButton = el('button', {}, 'Undo');
    this.undoButton.addEventListener('click', () => this.undo());
    this.redoButton = el('button', {}, 'Redo');
    this.redoButton.addEventListener('click', () => this.redo());
    historyGroup.append(this.undoButton, this.redoButton);
    bar.appendChild(historyGroup);

    const fixtures = el('div', { class: 'group' });
    const quad = el('button', {}, 'Quadruped');
    quad.addEventListener('click', () => this.loadSketch(buildQuadruped()));
    const thin = el('button', {}, 'Thin limb');
    thin.addEventListener('click', () => this.loadSketch(buildThinLimb()));
    fixtures.append(quad, thin);
    bar.appendChild(fixtures);

    this.submitButton = el('button', { class: 'submit' }, 'Compile blueprint');
    this.submitButton.addEventListener('click', () => void this.submit());
    bar.appendChild(this.submitButton);
    return bar;
  }

  private buildBody(): HTMLElement {
    const body = el('main', { class: 'split' });
    const editor = el('section', { class: 'editor' });
    this.slice = el('canvas');
    this.slice.addEventListener('pointerdown', (ev) => this.onPointerDown(ev));
    this.slice.addEventListener('pointermove', (ev) => this.onPointerMove(ev));
    this.slice.addEventListener('pointerup', (ev) => this.onPointerUp(ev));
    editor.appendChild(this.slice);
    editor.appendChild(
      el(
        'div',
        { class: 'hint' },
        'Paint one z layer at a time. Joint tool: click to add on the ' +
          'current layer plane, click a marker to remove.',
      ),
    );
    body.appendChild(editor);
    body.appendChild(el('section', { class: 'viewport' }));
    const panel = el('aside', { class: 'panel' });
    this.bannerBox = el('div');
    this.gaugeBox = el('div');
    panel.append(this.bannerBox, this.gaugeBox);
    body.appendChild(panel);
    return body;
  }

  // --- editing -------------------------------------------------------------

  setTool(tool: Tool): void {
    this.tool = tool;
    for (const [name, button] of this.toolButtons) {
      button.classList.toggle('active', name === tool);
    }
  }

  private cellAt(ev: PointerEvent): Vec3 | null {
    const rect = this.slice.getBoundingClientRect();
    const x = Math.floor((ev.clientX - rect.left) / CELL_PX);
    // canvas y grows downward; grid y grows upward
    const y = this.doc.dims[1] - 1 - Math.floor((ev.clientY - rect.top) / CELL_PX);
    if (!this.doc.inBounds(x, y, this.layer)) return null;
    return [x, y, this.layer];
  }

  private onPointerDown(ev: PointerEvent): void {
    const cell = this.cellAt(ev);
    if (!cell) return;
    this.slice.setPointerCapture(ev.pointerId);
    if (this.tool === 'brush') {
      this.dragStart = cell;
      this.applyBrush(cell);
    } else if (this.tool === 'joint') {
      this.toggleJoint(cell);
    } else {
      this.dragStart = cell;
    }
  }

  private onPointerMove(ev: PointerEvent): void {
    if (this.tool !== 'brush' || !this.dragStart) return;
    const cell = this.cellAt(ev);
    if (cell) this.applyBrush(cell);
  }

  private onPointerUp(ev: PointerEvent): void {
    const start = this.dragStart;
    const tool = this.tool;
    this.dragStart = null;
    if (tool === 'brush' || tool === 'joint' || !start) return;
    const end = this.cellAt(ev) ?? start;
    const min: Vec3 = [
      Math.min(start[0], end[0]),
      Math.min(start[1], end[1]),
      this.layer,
    ];
    const max: Vec3 = [
      Math.max(start[0], end[0]),
      Math.max(start[1], end[1]),
      this.layer,
    ];
    paint(this.doc, this.history, tool, this.material, { min, max });
    this.afterEdit();
  }

  private applyBrush(cell: Vec3): void {
    paint(this.doc, this.history, 'brush', this.material, {
      min: cell,
      max: cell,
      radius: this.brushRadius,
    });
    this.afterEdit();
  }

  private toggleJoint(cell: Vec3): void {
    const v = this.doc.voxelSizeMm;
    const pos: Vec3 = [(cell[0] + 0.5) * v, (cell[1] + 0.5) * v, this.layer * v];
    for (const joint of this.doc.jointList()) {
      const dx = joint.positionMm[0] - pos[0];
      const dy = joint.positionMm[1] - pos[1];
      const dz = joint.positionMm[2] - pos[2];
      if (Math.hypot(dx, dy, dz) < v) {
        removeJoint(this.doc, this.history, joint.id);
        this.afterEdit();
        return;
      }
    }
    placeJoint(this.doc, this.history, {
      id: this.doc.nextJointId(),
      positionMm: pos,
      axis: [0, 0, 1],
      rangeRad: [-0.8, 0.8],
    });
    this.afterEdit();
  }

  undo(): void {
    if (this.history.undo(this.doc)) this.afterEdit();
  }

  redo(): void {
    if (this.history.redo(this.doc)) this.afterEdit();
  }

  loadSketch(sketch: Sketch): void {
    this.doc = sketch.doc;
    this.history = sketch.history;
    this.layer = Math.min(this.layer, this.doc.dims[2] - 1);
    this.resetForDocument();
  }

  // --- submission ----------------------------------------------------------

  async submit(): Promise<void> {
    if (this.client.inFlight) return; // one request at a time
    if (this.doc.voxelCount === 0) {
      this.showBanner({
        severity: 'error',
        stage: null,
        reason: 'empty_sketch',
        jointId: null,
        segmentIds: [],
        message: 'Paint some voxels before compiling.',
      });
      return;
    }
    this.submitButton.disabled = true;
    try {
      const outcome = await submitSketch(this.doc, this.client, {
        design_id: 'studio-sketch',
      });
      if (outcome.kind === 'stale') return;
      this.showBanner(bannerFromOutcome(outcome));
      if (outcome.kind === 'success') {
        this.renderGauges(outcome.response.scores);
        this.showBlueprint(outcome.response);
      } else if (outcome.kind === 'stage-failure') {
        this.renderGauges(outcome.response.scores);
      }
    } finally {
      this.submitButton.disabled = false;
    }
  }

  private showBlueprint(response: NonNullable<SketchDocument['lastResponse']>): void {
    if (this.blueprintGroup) this.scene.remove(this.blueprintGroup);
    this.blueprintGroup = buildViewportScene(response);
    this.scene.add(this.blueprintGroup);
    this.sketchGroup.visible = false;
  }

  // --- painting the panels ---------------------------------------------------

  private resetForDocument(): void {
    if (this.blueprintGroup) {
      this.scene.remove(this.blueprintGroup);
      this.blueprintGroup = null;
    }
    this.sketchGroup.visible = true;
    this.layerInput.max = String(this.doc.dims[2] - 1);
    this.layerInput.value = String(this.layer);
    this.slice.width = this.doc.dims[0] * CELL_PX;
    this.slice.height = this.doc.dims[1] * CELL_PX;
    this.showBanner(null);
    this.renderGauges(null);
    this.afterEdit();
    this.frameCamera();
  }

  private afterEdit(): void {
    this.undoButton.disabled = !this.history.canUndo();
    this.redoButton.disabled = !this.history.canRedo();
    this.refreshSlice();
    this.refreshVoxels();
  }

  private refreshSlice(): void {
    this.layerLabel.textContent = `z=${this.layer}`;
    const ctx = this.slice.getContext('2d');
    if (!ctx) return;
    const [nx, ny] = this.doc.dims;
    ctx.fillStyle = '#10131a';
    ctx.fillRect(0, 0, nx * CELL_PX, ny * CELL_PX);
    for (let y = 0; y < ny; y++) {
      for (let x = 0; x < nx; x++) {
        const material = this.doc.materialAt(x, y, this.layer);
        if (material === Material.Empty) continue;
        ctx.fillStyle = MATERIAL_FILL[material] ?? '#ffffff';
        ctx.fillRect(
          x * CELL_PX,
          (ny - 1 - y) * CELL_PX,
          CELL_PX - 1,
          CELL_PX - 1,
        );
      }
    }
    const v = this.doc.voxelSizeMm;
    ctx.strokeStyle = '#ee5533';
    ctx.lineWidth = 2;
    for (const joint of this.doc.jointList()) {
      if (Math.abs(joint.positionMm[2] / v - this.layer) > 1) continue;
      const cx = (joint.positionMm[0] / v) * CELL_PX;
      const cy = (ny - joint.positionMm[1] / v) * CELL_PX;
      ctx.beginPath();
      ctx.arc(cx, cy, CELL_PX * 0.6, 0, Math.PI * 2);
      ctx.stroke();
    }
  }

  private refreshVoxels(): void {
    this.sketchGroup.clear();
    const cells = this.doc.cells();
    if (cells.length === 0) return;
    const v = this.doc.voxelSizeMm;
    const geometry = new THREE.BoxGeometry(v, v, v);
    const mesh = new THREE.InstancedMesh(
      geometry,
      new THREE.MeshStandardMaterial(),
      cells.length,
    );
    const pose = new THREE.Matrix4();
    const rigid = new THREE.Color(0x8899aa);
    const soft = new THREE.Color(0x55aa77);
    cells.forEach(([index, material], i) => {
      const [x, y, z] = this.doc.coords(index);
      pose.makeTranslation((x + 0.5) * v, (y + 0.5) * v, (z + 0.5) * v);
      mesh.setMatrixAt(i, pose);
      mesh.setColorAt(i, material === Material.Soft ? soft : rigid);
    });
    mesh.instanceMatrix.needsUpdate = true;
    if (mesh.instanceColor) mesh.instanceColor.needsUpdate = true;
    this.sketchGroup.add(mesh);
    for (const joint of this.doc.jointList()) {
      const marker = new THREE.Mesh(
        new THREE.SphereGeometry(v * 0.45, 10, 8),
        new THREE.MeshBasicMaterial({ color: 0xee5533 }),
      );
      marker.position.set(...joint.positionMm);
      this.sketchGroup.add(marker);
    }
  }

  private frameCamera(): void {
    const [nx, ny, nz] = this.doc.dims;
    const v = this.doc.voxelSizeMm;
    const center = new THREE.Vector3((nx * v) / 2, (ny * v) / 2, (nz * v) / 2);
    const span = Math.max(nx, ny, nz) * v;
    this.camera.position.set(center.x + span, center.y - span, center.z + span * 0.8);
    this.camera.up.set(0, 0, 1);
    this.camera.lookAt(center);
    this.controls.target.copy(center);
  }

  private showBanner(model: BannerModel | null): void {
    this.bannerBox.replaceChildren();
    if (!model) return;
    const box = el('div', { class: `banner ${model.severity}` });
    if (model.stage) {
      box.appendChild(el('div', { class: 'stage' }, `stage: ${model.stage}`));
    }
    box.appendChild(el('div', {}, model.message));
    if (model.segmentIds.length) {
      box.appendChild(
        el('div', {}, `segments involved: ${model.segmentIds.join(', ')}`),
      );
    }
    this.bannerBox.appendChild(box);
  }

  private renderGauges(scores: ScorePayload | null): void {
    this.gaugeBox.replaceChildren();
    if (!scores) {
      this.gaugeBox.appendChild(
        el('div', { class: 'hint' }, 'Compile to see manufacturability scores.'),
      );
      return;
    }
    for (const gauge of buildGauges(scores)) {
      const wrap = el('div', { class: 'gauge' });
      const label = el('div', { class: 'label' });
      label.append(
        el('span', {}, gauge.label),
        el('span', {}, gauge.value.toFixed(3)),
      );
      const track = el('div', { class: 'track' });
      const fill = el('div', { class: 'fill' });
      fill.style.width = `${(gauge.fraction * 100).toFixed(1)}%`;
      track.appendChild(fill);
      wrap.append(label, track);
      this.gaugeBox.appendChild(wrap);
    }
  }
}
