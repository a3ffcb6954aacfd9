var a = 1, b = 2, c = 3, x = 1, img = ee.Image(0), s = 'z';
var c = ee.ImageCollection('C').filter(ee.Filter.eq('k', '/*v*/')).first();
var tpl = `a${`nested ${'//'} tpl`}b`; // nested template
// standalone comment 79
if (x) { /* empty */ } else { print('a/*b*/c'); }
var q = a / b / c; // divisions, not regexes
