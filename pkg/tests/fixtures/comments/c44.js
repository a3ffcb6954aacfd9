var a = 1, b = 2, c = 3, x = 1, img = ee.Image(0), s = 'z';
var r2 = /[/]+/.test('a//b');
// standalone comment 85
var m = s.replace(/\/\//g, '/'); // escaped slashes
// standalone comment 96
var t = `line // kept ${ee.Number(1).add(2) /* inner */} /* kept */`;
// standalone comment 7
var tpl = `a${`nested ${'//'} tpl`}b`; // nested template
