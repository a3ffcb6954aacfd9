var a = 1, b = 2, c = 3, x = 1, img = ee.Image(0), s = 'z';
var r2 = /[/]+/.test('a//b');
var r2 = /[/]+/.test('a//b');
var img = ee.Image('X')  /* block */ .select(['B4']) // after chain
var m = s.replace(/\/\//g, '/'); // escaped slashes
// standalone comment 13
var tpl = `a${`nested ${'//'} tpl`}b`; // nested template
if (x) { /* empty */ } else { print('a/*b*/c'); }
// standalone comment 78
var url = 'http://example.com/a//b'; // trailing note
// standalone comment 92

var q = a / b / c; // divisions, not regexes
// standalone comment 26
