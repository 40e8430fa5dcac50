import { describe, expect, it } from 'vitest';

import { escapeHtml, renderMarkdown } from '../src/markdown.js';

describe('markdown rendering', () => {
  it('escapes HTML before any markup is applied', () => {
    const html = renderMarkdown('<script>alert(1)</script> & <img onerror=x>');
    expect(html).not.toContain('<script>');
    expect(html).not.toContain('<img');
    expect(html).toContain('&lt;script&gt;');
    expect(html).toContain('&amp;');
  });

  it('renders headings, lists, emphasis, and code', () => {
    const html = renderMarkdown(
      '# Title\n\n- first\n- second\n\nbody with **bold**, *italic*, and `code`',
    );
    expect(html).toContain('<h1>Title</h1>');
    expect(html).toContain('<ul>');
    expect(html).toContain('<li>first</li>');
    expect(html).toContain('<strong>bold</strong>');
    expect(html).toContain('<em>italic</em>');
    expect(html).toContain('<code>code</code>');
  });

  it('only links out to http(s) URLs', () => {
    const ok = renderMarkdown('[docs](https://example.org/a)');
    expect(ok).toContain('<a href="https://example.org/a"');
    const bad = renderMarkdown('[x](javascript:alert(1))');
    expect(bad).not.toContain('<a ');
  });

  it('separates paragraphs on blank lines', () => {
    const html = renderMarkdown('one\n\ntwo');
    expect(html).toBe('<p>one</p>\n<p>two</p>');
  });

  it('escapeHtml covers the five significant characters', () => {
    expect(escapeHtml(`<>&"'`)).toBe('&lt;&gt;&amp;&quot;&#39;');
  });
});
