// Hash-based client-side routing across the page groups.

export type PageRenderer = (root: HTMLElement) => void | Promise<void>;

export class Router {
  private routes = new Map<string, PageRenderer>();

  constructor(private readonly outlet: HTMLElement) {
    window.addEventListener('hashchange', () => void this.render());
  }

  register(path: string, renderer: PageRenderer): this {
    this.routes.set(path, renderer);
    return this;
  }

  current(): string {
    return window.location.hash.replace(/^#/, '') || '/';
  }

  navigate(path: string): void {
    window.location.hash = path;
  }

  async render(): Promise<void> {
    const renderer = this.routes.get(this.current()) ?? this.routes.get('/');
    if (!renderer) return;
    this.outlet.replaceChildren();
    await renderer(this.outlet);
  }
}
