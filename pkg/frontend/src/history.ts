import { SketchDocument } from './document';

/**
 * A command mutates the document in place and remembers, per apply, what it
 * changed so revert is exact. apply must recompute its undo record each
 * time, which makes a command list replayable on a fresh document.
 */
export interface EditCommand {
  readonly label: string;
  apply(doc: SketchDocument): void;
  revert(doc: SketchDocument): void;
}

export class History {
  private undoStack: EditCommand[] = [];
  private redoStack: EditCommand[] = [];

  apply(doc: SketchDocument, command: EditCommand): void {
    command.apply(doc);
    this.undoStack.push(command);
    this.redoStack = [];
  }

  undo(doc: SketchDocument): EditCommand | null {
    const command = this.undoStack.pop();
    if (!command) return null;
    command.revert(doc);
    this.redoStack.push(command);
    return command;
  }

  redo(doc: SketchDocument): EditCommand | null {
    const command = this.redoStack.pop();
    if (!command) return null;
    command.apply(doc);
    this.undoStack.push(command);
    return command;
  }

  canUndo(): boolean {
    return this.undoStack.length > 0;
  }

  canRedo(): boolean {
    return this.redoStack.length > 0;
  }

  depth(): number {
    return this.undoStack.length;
  }

  /**
   * Replay the applied command list onto a fresh document with the same
   * grid. The result must equal the live document; the invariant the tests
   * pin.
   */
  replay(like: SketchDocument): SketchDocument {
    const doc = new SketchDocument(like.dims, like.voxelSizeMm);
    for (const command of this.undoStack) command.apply(doc);
    return doc;
  }
}
