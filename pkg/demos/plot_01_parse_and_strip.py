"""
Parsing a page and stripping boilerplate
========================================

An entity page is parsed into a style-annotated tree. Navigation, ads and
footers are then removed and the remaining visible text leaves are listed
with the font size and weight a browser would give them.
"""

from bew.dom import collect_text_leaves, parse_html, strip_boilerplate

html = """
<html><body>
<nav id="top-nav"><a href="/">Home</a> <a href="/deals">Deals</a></nav>
<div class="ad-banner">Sponsored: 20% off delivery</div>
<h1>Jodoku Sushi Rockridge</h1>
<div class="item"><span style="font-size:20px;font-weight:bold">Dining Style</span><span>Casual Dining</span></div>
<div class="item"><span style="font-size:20px;font-weight:bold">Cuisines</span><span>Sushi, Japanese</span></div>
<div style="display:none">tracking pixel text</div>
<footer>&copy; 2020 Example Reservations</footer>
</body></html>
"""

page = parse_html(html)
print("before:", [leaf.text for leaf in collect_text_leaves(page)])

# %%
# Stripping keeps only the content blocks. Each leaf carries its path in the
# tree, which the template miner uses later to find section boundaries.

clean = strip_boilerplate(page)
for leaf in collect_text_leaves(clean):
    print(f"{leaf.style.font_size_px:5.1f}px  w{leaf.style.font_weight}  {leaf.node_path}  {leaf.text}")
